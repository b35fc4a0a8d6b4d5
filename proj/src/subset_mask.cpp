#include "dsm/subset_mask.hpp"

#include <algorithm>
#include <numeric>

#include "dsm/error.hpp"

namespace dsm {

SubsetMask::SubsetMask(std::size_t universe, std::vector<std::size_t> active)
    : universe_(universe), active_(std::move(active)) {
  for (std::size_t k = 0; k < active_.size(); ++k) {
    if (active_[k] >= universe_) throw InvalidParameter("SubsetMask: index out of range");
    if (k > 0 && active_[k] <= active_[k - 1]) {
      throw InvalidParameter("SubsetMask: active indices must be strictly increasing");
    }
  }
}

SubsetMask SubsetMask::all(std::size_t universe) {
  std::vector<std::size_t> active(universe);
  std::iota(active.begin(), active.end(), std::size_t{0});
  return SubsetMask(universe, std::move(active));
}

bool SubsetMask::contains(std::size_t index) const {
  return std::binary_search(active_.begin(), active_.end(), index);
}

std::vector<bool> SubsetMask::indicator() const {
  std::vector<bool> delta(universe_, false);
  for (std::size_t i : active_) delta[i] = true;
  return delta;
}

}  // namespace dsm
