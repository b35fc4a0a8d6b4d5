#ifndef DSM_SUBSET_MASK_HPP
#define DSM_SUBSET_MASK_HPP

#include <cstddef>
#include <vector>

namespace dsm {

/// The inclusion indicators delta over {0..N-1}, stored as the sorted list of
/// active indices. The dense indicator is materialized only on request so a
/// draw costs O(n log n) rather than O(N).
class SubsetMask {
 public:
  SubsetMask() = default;

  /// Throws InvalidParameter unless `active` is strictly increasing and < universe.
  SubsetMask(std::size_t universe, std::vector<std::size_t> active);

  static SubsetMask all(std::size_t universe);

  std::size_t universe() const noexcept { return universe_; }
  std::size_t size() const noexcept { return active_.size(); }
  const std::vector<std::size_t>& active() const noexcept { return active_; }

  bool contains(std::size_t index) const;
  std::vector<bool> indicator() const;

  friend bool operator==(const SubsetMask&, const SubsetMask&) = default;

 private:
  std::size_t universe_ = 0;
  std::vector<std::size_t> active_;
};

}  // namespace dsm

#endif  // DSM_SUBSET_MASK_HPP
