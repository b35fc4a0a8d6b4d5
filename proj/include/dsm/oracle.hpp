#ifndef DSM_ORACLE_HPP
#define DSM_ORACLE_HPP

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dsm/distributions.hpp"
#include "dsm/model.hpp"

// Brute-force checks of the subset model on instances small enough to
// enumerate every subset. Variances are frozen so every marginal is a
// Gaussian with a closed form; quadrature over at most three parameter
// dimensions gives an independent second route to the same numbers.
namespace dsm::oracle {

struct TinyModelSpec {
  std::size_t N = 2;
  std::size_t n = 1;
  FixedVariances variances;
  Eigen::VectorXd x;       // covariate per observation (p = 1)
  Eigen::VectorXd coords;  // time index per observation
  BasisConfig basis;
  std::size_t quadrature_nodes = 200;

  /// x = 1, coords = 1..N.
  static TinyModelSpec make(std::size_t N, std::size_t n, FixedVariances variances = {}, double rho = 0.3);

  void validate() const;
  DatasetView dataset(const Eigen::VectorXd& y) const;
};

/// All size-n subsets of {0..N-1} in lexicographic order.
std::vector<SubsetMask> enumerate_subsets(std::size_t N, std::size_t n);

/// Pr(delta | n) = 1 / C(N, n) under SRSWOR.
double subset_probability(std::size_t N, std::size_t n);

/// Gauss-Hermite rule for the standard normal: sum_k w_k f(z_k) ~ E f(Z).
struct GaussHermiteRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
GaussHermiteRule gauss_hermite(std::size_t nodes);

/// Covariance of y_delta after integrating out beta, eta_delta and xi_delta.
Eigen::MatrixXd marginal_covariance(const TinyModelSpec& spec, const SubsetMask& mask);

/// m(delta, y): the density of y_delta with every latent and parameter
/// integrated out, in closed form.
double marginal_m(const TinyModelSpec& spec, const SubsetMask& mask, const Eigen::VectorXd& y);

/// Which parameters are integrated numerically; the rest analytically.
enum class QuadratureBlock { Beta, BetaEta, BetaEtaXi };

/// Largest block of dimension <= 3 for this subset size.
QuadratureBlock default_block(std::size_t n);

/// m(delta, y) by tensor Gauss-Hermite quadrature over `block`.
double marginal_m_quadrature(const TinyModelSpec& spec, const SubsetMask& mask, const Eigen::VectorXd& y,
                             QuadratureBlock block);
double marginal_m_quadrature(const TinyModelSpec& spec, const SubsetMask& mask, const Eigen::VectorXd& y);

struct Proposition1Report {
  double mixture_marginal;  // sum_delta Pr(delta) * integral * m(1,y)/m(delta,y)
  double full_marginal;     // m(1_N, y)
  double relative_error;
  bool passed;
  std::string describe() const;
};
Proposition1Report check_proposition1(const TinyModelSpec& spec, const Eigen::VectorXd& y, double tolerance = 1e-6);

struct Proposition3Report {
  double expected_probability;          // Pr(delta | n)
  std::vector<double> recovered;        // joint(delta, y) / m(1_N, y), per y and delta (row-major)
  double max_abs_error;
  bool passed;
  std::string describe() const;
};
Proposition3Report check_proposition3(const TinyModelSpec& spec, const std::vector<Eigen::VectorXd>& y_grid,
                                      double tolerance = 1e-6);

struct PosteriorEquivalenceReport {
  std::size_t grid_points = 0;
  double max_relative_difference = 0.0;
  bool vacuous = false;  // mask holds every index
  bool passed = true;
  std::string describe() const;
};

/// Evaluates the normalized conditional posterior of (beta[, eta_delta])
/// given (y, delta) for two data vectors that agree on y_delta, using the
/// full data-subset-model joint including the m(1,y)/m(delta,y) weight, and
/// compares them pointwise on a parameter grid.
PosteriorEquivalenceReport check_posterior_equivalence(const TinyModelSpec& spec, const SubsetMask& mask,
                                                       const Eigen::VectorXd& y, const Eigen::VectorXd& y_perturbed,
                                                       double tolerance = 1e-10);

/// One Gaussian component N(mean, variance) of the beta posterior.
struct MixtureComponent {
  double weight;
  double mean;
  double variance;
};

/// p(beta | y, n) = sum_delta Pr(delta|n) p(beta | y_delta, delta), each term
/// from the closed-form marginal y_delta ~ N(x_delta beta, Sigma_delta).
std::vector<MixtureComponent> beta_mixture_posterior(const TinyModelSpec& spec, const Eigen::VectorXd& y);
double mixture_cdf(const std::vector<MixtureComponent>& mixture, double x);
double mixture_quantile(const std::vector<MixtureComponent>& mixture, double p);

/// Exact draw of (beta, eta_delta, xi_delta) from their joint conditional
/// given (y, delta), via the joint precision matrix. Returns beta first.
Eigen::VectorXd exact_conditional_draw(const TinyModelSpec& spec, const Eigen::VectorXd& y, const SubsetMask& mask,
                                       Rng& rng);

struct ChiSquaredReport {
  std::size_t draws = 0;
  std::size_t bins = 0;
  double statistic = 0.0;
  double p_value = 0.0;
  bool passed = false;
  std::string describe() const;
};

/// Pearson goodness of fit of `samples` against equiprobable bins of the mixture.
ChiSquaredReport chi_squared_against_mixture(const std::vector<double>& samples,
                                             const std::vector<MixtureComponent>& mixture, std::size_t bins,
                                             double significance);

/// Composite sampler (fresh SRSWOR subset, then an exact conditional draw)
/// on the tiny model; its beta draws are tested against the exact mixture.
ChiSquaredReport check_proposition6(const TinyModelSpec& spec, const Eigen::VectorXd& y, std::size_t draws,
                                    RngSeed seed, std::size_t bins = 20, double significance = 1e-3);

}  // namespace dsm::oracle

#endif  // DSM_ORACLE_HPP
