#ifndef DSM_ERROR_HPP
#define DSM_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dsm {

/// Bad argument, flag, or violated type invariant.
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A linear-algebra step failed (non-PD precision, non-finite draw, ...).
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::size_t subset_size, std::size_t iteration = 0)
      : std::runtime_error(what), subset_size_(subset_size), iteration_(iteration) {}

  std::size_t subset_size() const noexcept { return subset_size_; }
  /// 1-based Gibbs iteration, 0 when raised outside a chain.
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t subset_size_;
  std::size_t iteration_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dsm

#endif  // DSM_ERROR_HPP
