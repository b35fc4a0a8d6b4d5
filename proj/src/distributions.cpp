#include "dsm/distributions.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace dsm {

RngSeed derive_seed(RngSeed master, std::uint64_t stream) noexcept {
  std::uint64_t z = master.value + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return RngSeed{z ^ (z >> 31)};
}

double draw_standard_normal(Rng& rng) {
  boost::random::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

Eigen::VectorXd draw_standard_normal(Eigen::Index size, Rng& rng) {
  Eigen::VectorXd z(size);
  for (Eigen::Index i = 0; i < size; ++i) z(i) = draw_standard_normal(rng);
  return z;
}

double draw_normal(double mean, double variance, Rng& rng) {
  if (!(variance > 0.0) || !std::isfinite(variance) || !std::isfinite(mean)) {
    throw InvalidParameter("draw_normal: variance must be finite and > 0, got " + std::to_string(variance));
  }
  return mean + std::sqrt(variance) * draw_standard_normal(rng);
}

double draw_inverse_gamma(double shape, double rate, Rng& rng) {
  if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate)) {
    throw InvalidParameter("draw_inverse_gamma: shape and rate must be finite and > 0");
  }
  boost::random::gamma_distribution<double> gamma(shape, 1.0 / rate);
  double g = gamma(rng);
  // Gamma underflow to 0 is possible for tiny shapes; resample rather than return inf.
  while (!(g > 0.0)) g = gamma(rng);
  return 1.0 / g;
}

SubsetMask draw_srswor(std::size_t n, std::size_t N, Rng& rng) {
  SubsetSampler sampler(N);
  return sampler.draw(n, rng);
}

SubsetSampler::SubsetSampler(std::size_t universe) : universe_(universe), pool_(universe) {
  std::iota(pool_.begin(), pool_.end(), std::size_t{0});
}

SubsetSampler::SubsetSampler(std::size_t universe, std::vector<std::size_t> eligible)
    : universe_(universe), pool_(std::move(eligible)) {
  std::vector<std::size_t> sorted = pool_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InvalidParameter("SubsetSampler: duplicate index in eligible pool");
  }
  if (!sorted.empty() && sorted.back() >= universe_) {
    throw InvalidParameter("SubsetSampler: eligible index out of range");
  }
}

SubsetMask SubsetSampler::draw(std::size_t n, Rng& rng) {
  if (n < 1 || n > pool_.size()) {
    throw InvalidParameter("SRSWOR requires 1 <= n <= pool size; got n=" + std::to_string(n) +
                           ", pool=" + std::to_string(pool_.size()));
  }
  const std::size_t size = pool_.size();
  for (std::size_t i = 0; i < n; ++i) {
    boost::random::uniform_int_distribution<std::size_t> pick(i, size - 1);
    std::swap(pool_[i], pool_[pick(rng)]);
  }
  std::vector<std::size_t> active(pool_.begin(), pool_.begin() + static_cast<std::ptrdiff_t>(n));
  std::sort(active.begin(), active.end());
  return SubsetMask(universe_, std::move(active));
}

void MlbParams::validate() const {
  const Eigen::Index r = mu.size();
  if (r == 0 || alpha.size() != r || kappa.size() != r || v_inverse.rows() != r || v_inverse.cols() != r) {
    throw InvalidParameter("MlbParams: dimension mismatch");
  }
  for (Eigen::Index i = 0; i < r; ++i) {
    if (!(alpha(i) > 0.0) || !(kappa(i) > alpha(i))) {
      throw InvalidParameter("MlbParams: need kappa_i > alpha_i > 0");
    }
    if (!(v_inverse(i, i) > 0.0)) throw InvalidParameter("MlbParams: v_inverse diagonal must be > 0");
    for (Eigen::Index j = i + 1; j < r; ++j) {
      if (v_inverse(i, j) != 0.0) throw InvalidParameter("MlbParams: v_inverse must be lower triangular");
    }
  }
  if (!mu.allFinite() || !v_inverse.allFinite()) throw InvalidParameter("MlbParams: non-finite entry");
}

double mlb_log_density(const Eigen::Ref<const Eigen::VectorXd>& eta, const MlbParams& params) {
  params.validate();
  if (eta.size() != params.mu.size()) throw InvalidParameter("mlb_log_density: eta has wrong dimension");
  if (!eta.allFinite()) throw InvalidParameter("mlb_log_density: non-finite eta");

  const Eigen::VectorXd w = params.v_inverse.triangularView<Eigen::Lower>() * (eta - params.mu);
  double value = params.v_inverse.diagonal().array().log().sum();
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double a = params.alpha(i);
    const double k = params.kappa(i);
    value += std::lgamma(k) - std::lgamma(a) - std::lgamma(k - a);
    value += a * w(i) - k * log1p_exp(w(i));
  }
  return value;
}

}  // namespace dsm
