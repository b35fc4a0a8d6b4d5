#ifndef DSM_SIMDATA_HPP
#define DSM_SIMDATA_HPP

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "dsm/distributions.hpp"
#include "dsm/model.hpp"

namespace dsm {

struct Ar1Config {
  std::size_t N = 100000;
  double phi = 0.9;
  double noise_var = 0.1;
  RngSeed seed;
  std::size_t prediction_count = 1000;
  /// Start the recursion at this value instead of a stationary draw.
  std::optional<double> initial_mu;

  void validate() const;
};

struct SimulatedSeries {
  DatasetView data;              // intercept-only, coords = 1..N
  Eigen::VectorXd truth_mu;      // latent mu_1..mu_N
  std::vector<std::size_t> prediction_set;
};

/// mu_1 from the stationary law (or `initial_mu`), mu_i = phi mu_{i-1} + zeta_i,
/// Y_i = mu_i + eps_i, with zeta, eps iid Normal(0, noise_var).
SimulatedSeries generate_ar1(const Ar1Config& config);

/// m indices spread evenly over {0..N-1}: the midpoints of m equal blocks.
std::vector<std::size_t> equally_spaced_indices(std::size_t N, std::size_t m);

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar rmspe(const Eigen::MatrixBase<DerivedA>& truth, const Eigen::MatrixBase<DerivedB>& pred) {
  if (truth.size() != pred.size() || truth.size() == 0) {
    throw InvalidParameter("rmspe: inputs must be nonempty and of equal length");
  }
  using std::sqrt;
  return sqrt((truth - pred).squaredNorm() / static_cast<typename DerivedA::Scalar>(truth.size()));
}

/// Root mean squared testing error against held-out observations.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar rste(const Eigen::MatrixBase<DerivedA>& holdout_y, const Eigen::MatrixBase<DerivedB>& pred) {
  return rmspe(holdout_y, pred);
}

struct SplitDataset {
  DatasetView train;
  Eigen::VectorXd holdout_y;
  Eigen::MatrixXd holdout_x;
  Eigen::MatrixXd holdout_coords;
  std::vector<std::size_t> train_indices;    // into the original data, increasing
  std::vector<std::size_t> holdout_indices;  // into the original data, increasing
};

/// SRSWOR holdout of floor(fraction * N) observations.
SplitDataset split_holdout(const DatasetView& data, double holdout_fraction, Rng& rng);

}  // namespace dsm

#endif  // DSM_SIMDATA_HPP
