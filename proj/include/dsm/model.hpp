#ifndef DSM_MODEL_HPP
#define DSM_MODEL_HPP

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "dsm/distributions.hpp"
#include "dsm/error.hpp"
#include "dsm/subset_mask.hpp"

namespace dsm {

/// The N observations. Row i of `x` holds the covariates x_i, row i of
/// `coords` the location fed to the basis function (one column for a time
/// index, two columns latitude/longitude in degrees for the sphere).
struct DatasetView {
  Eigen::VectorXd y;
  Eigen::MatrixXd x;
  Eigen::MatrixXd coords;

  std::size_t size() const noexcept { return static_cast<std::size_t>(y.size()); }
  std::size_t covariates() const noexcept { return static_cast<std::size_t>(x.cols()); }

  void validate() const;

  /// Intercept-only design with coords = 1..N.
  static DatasetView intercept_only(Eigen::VectorXd y);
};

enum class Metric { AbsoluteDifference, GreatCircle };

inline constexpr double kEarthRadiusKm = 6371.0;

struct BasisConfig {
  double rho = 0.3;
  Metric metric = Metric::AbsoluteDifference;

  void validate() const;
  /// Coordinate columns the metric expects.
  Eigen::Index coord_dims() const noexcept { return metric == Metric::GreatCircle ? 2 : 1; }
};

/// |a - b| on the line, or great-circle distance in km between (lat, lon) pairs in degrees.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar basis_distance(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
                                         Metric metric) {
  using Scalar = typename DerivedA::Scalar;
  using std::abs, std::asin, std::cos, std::min, std::sin, std::sqrt;
  if (metric == Metric::AbsoluteDifference) return abs(a(0) - b(0));
  const Scalar deg = Scalar(M_PI / 180.0);
  const Scalar lat1 = a(0) * deg, lat2 = b(0) * deg;
  const Scalar dlat = lat2 - lat1, dlon = (b(1) - a(1)) * deg;
  const Scalar h = sin(dlat / 2) * sin(dlat / 2) + cos(lat1) * cos(lat2) * sin(dlon / 2) * sin(dlon / 2);
  return Scalar(2 * kEarthRadiusKm) * asin(min(Scalar(1), sqrt(h)));
}

/// K(j, k) = exp(-rho * d(a_j, b_k)) for coordinate rows a_j, b_k.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> kernel_matrix(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b, const BasisConfig& basis) {
  using Scalar = typename DerivedA::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> k(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < a.rows(); ++j) {
    for (Eigen::Index c = 0; c < b.rows(); ++c) {
      k(j, c) = std::exp(-Scalar(basis.rho) * basis_distance(a.row(j), b.row(c), basis.metric));
    }
  }
  return k;
}

/// Symmetric kernel over one coordinate set; only the lower triangle is evaluated.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> kernel_matrix(
    const Eigen::MatrixBase<Derived>& coords, const BasisConfig& basis) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = coords.rows();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    k(j, j) = Scalar(1);
    for (Eigen::Index c = 0; c < j; ++c) {
      k(j, c) = k(c, j) = std::exp(-Scalar(basis.rho) * basis_distance(coords.row(j), coords.row(c), basis.metric));
    }
  }
  return k;
}

/// Rows of `m` at `rows`.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Derived::ColsAtCompileTime> gather_rows(
    const Eigen::MatrixBase<Derived>& m, const std::vector<std::size_t>& rows) {
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Derived::ColsAtCompileTime> out(
      static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = m.row(static_cast<Eigen::Index>(rows[k]));
  return out;
}

/// Restriction of the data and the full-rank basis to the active indices.
struct SubsetDesign {
  Eigen::VectorXd y;    // y_delta (n)
  Eigen::MatrixXd x;    // X_delta (n x p)
  Eigen::MatrixXd psi;  // Psi_delta (n x n)
};

SubsetDesign build_subset_design(const DatasetView& data, const BasisConfig& basis, const SubsetMask& mask);

/// (beta, eta, xi) and the four variance components.
struct ChainState {
  Eigen::VectorXd beta;
  Eigen::VectorXd eta;
  Eigen::VectorXd xi;
  double sigma2 = 1.0;
  double sigma2_eta = 1.0;
  double sigma2_xi = 1.0;
  double sigma2_beta = 1.0;

  /// beta = 0, eta = 0, xi = 0, all variances 1.
  static ChainState initial(std::size_t N, std::size_t p);
  void validate() const;
};

struct FixedVariances {
  double sigma2 = 1.0;
  double sigma2_eta = 1.0;
  double sigma2_xi = 1.0;
  double sigma2_beta = 1.0;

  void validate() const;
};

struct SamplerConfig {
  double ig_shape = 1.0;  // a
  double ig_rate = 1.0;   // b
  std::size_t iterations = 10000;  // G
  std::size_t burn_in = 1000;      // g0
  std::vector<std::size_t> prediction_set;  // A, 0-based, strictly increasing
  BasisConfig basis;
  RngSeed seed;

  /// Freeze the variances instead of drawing them (conjugate test instances).
  std::optional<FixedVariances> fixed_variances;
  /// Use this mask at every iteration instead of drawing one.
  std::optional<SubsetMask> fixed_subset;
  /// Indices whose observations never enter the likelihood (held-out data).
  std::vector<std::size_t> holdout;

  bool record_trace = false;
  bool record_masks = false;

  void validate(std::size_t N) const;
};

/// Prediction mu_i = x_i' beta + sum_{j in A} psi_i(j) eta_j + xi_i for i in A,
/// with X_A and the m x m kernel over A precomputed once.
class PredictionBasis {
 public:
  PredictionBasis(const DatasetView& data, const BasisConfig& basis, std::vector<std::size_t> prediction_set);

  const std::vector<std::size_t>& indices() const noexcept { return indices_; }
  std::size_t size() const noexcept { return indices_.size(); }

  Eigen::VectorXd evaluate(const ChainState& state) const;

 private:
  std::vector<std::size_t> indices_;
  Eigen::MatrixXd x_;
  Eigen::MatrixXd psi_;  // TODO: banded/sparse storage for m beyond ~10^4, where m^2 doubles no longer fit.
};

Eigen::VectorXd predict_mu(const ChainState& state, const DatasetView& data, const BasisConfig& basis,
                           const std::vector<std::size_t>& prediction_set);

/// Throws unless `indices` is strictly increasing, nonempty, and < N.
void validate_index_set(const std::vector<std::size_t>& indices, std::size_t N, const char* what);

}  // namespace dsm

#endif  // DSM_MODEL_HPP
