#ifndef DSM_DISTRIBUTIONS_HPP
#define DSM_DISTRIBUTIONS_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "dsm/error.hpp"
#include "dsm/subset_mask.hpp"

namespace dsm {

/// Engine behind every variate in the library. The engine's output sequence
/// is fixed by the standard; the distributions layered on top come from
/// Boost.Random, whose algorithms do not vary between standard libraries.
using Rng = std::mt19937_64;

struct RngSeed {
  std::uint64_t value = 0;
  friend bool operator==(const RngSeed&, const RngSeed&) = default;
};

inline Rng make_rng(RngSeed seed) { return Rng(seed.value); }

/// Independent child seed for stream `stream` of `master` (SplitMix64 finalizer).
RngSeed derive_seed(RngSeed master, std::uint64_t stream) noexcept;

double draw_normal(double mean, double variance, Rng& rng);
double draw_standard_normal(Rng& rng);
Eigen::VectorXd draw_standard_normal(Eigen::Index size, Rng& rng);

/// X = 1/G with G ~ Gamma(shape, scale = 1/rate); density ∝ x^{-shape-1} exp(-rate/x).
double draw_inverse_gamma(double shape, double rate, Rng& rng);

/// Simple random sample without replacement of n out of {0..N-1}.
SubsetMask draw_srswor(std::size_t n, std::size_t N, Rng& rng);

/// Reusable SRSWOR sampler over a fixed pool of eligible indices. Each draw
/// runs a partial Fisher-Yates pass over the persistent pool; the pool's
/// arrangement left over from the previous draw does not bias the next one,
/// so no O(N) reset is needed per draw.
class SubsetSampler {
 public:
  /// Pool = {0..universe-1}.
  explicit SubsetSampler(std::size_t universe);
  /// Pool = `eligible` (any order, no duplicates, all < universe).
  SubsetSampler(std::size_t universe, std::vector<std::size_t> eligible);

  std::size_t universe() const noexcept { return universe_; }
  std::size_t pool_size() const noexcept { return pool_.size(); }

  SubsetMask draw(std::size_t n, Rng& rng);

 private:
  std::size_t universe_;
  std::vector<std::size_t> pool_;
};

/// Parameters of the multivariate logit-beta law MLB(mu, V, alpha, kappa).
struct MlbParams {
  Eigen::VectorXd mu;
  Eigen::MatrixXd v_inverse;  // lower triangular, positive diagonal
  Eigen::VectorXd alpha;
  Eigen::VectorXd kappa;

  void validate() const;
};

/// log(1 + exp(x)) without overflow.
inline double log1p_exp(double x) noexcept { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double mlb_log_density(const Eigen::Ref<const Eigen::VectorXd>& eta, const MlbParams& params);

}  // namespace dsm

#endif  // DSM_DISTRIBUTIONS_HPP
