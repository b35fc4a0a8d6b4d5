#ifndef DSM_GIBBS_HPP
#define DSM_GIBBS_HPP

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "dsm/distributions.hpp"
#include "dsm/model.hpp"

namespace dsm {

/// Counts Cholesky retries that needed diagonal jitter.
struct NumericsLog {
  std::size_t jitter_events = 0;
};

/// Draw x ~ Normal(Q^{-1} b, Q^{-1}) from the canonical form (Q, b) via the
/// Cholesky factor of Q. On factorization failure the diagonal is inflated
/// once by 1e-10 * trace(Q) / dim and `log` records it; a second failure
/// throws NumericalError.
Eigen::VectorXd draw_gaussian_canonical(const Eigen::MatrixXd& precision, const Eigen::VectorXd& linear, Rng& rng,
                                        NumericsLog& log);

struct GaussianConditional {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Full conditional of eta_delta: covariance (Psi'Psi/s2 + I/s2_eta)^{-1},
/// mean (Psi'Psi + (s2/s2_eta) I)^{-1} Psi'(y - X beta - xi).
GaussianConditional eta_conditional(const ChainState& state, const SubsetDesign& design,
                                    const Eigen::VectorXd& xi_delta);
Eigen::VectorXd update_eta_active(const ChainState& state, const SubsetDesign& design, const Eigen::VectorXd& xi_delta,
                                  Rng& rng, NumericsLog& log);

struct IsotropicConditional {
  Eigen::VectorXd mean;
  double variance;
};

/// Full conditional of xi_delta; independent across the n components.
IsotropicConditional xi_conditional(const ChainState& state, const SubsetDesign& design,
                                    const Eigen::VectorXd& eta_delta);
Eigen::VectorXd update_xi_active(const ChainState& state, const SubsetDesign& design, const Eigen::VectorXd& eta_delta,
                                 Rng& rng);

GaussianConditional beta_conditional(const ChainState& state, const SubsetDesign& design,
                                     const Eigen::VectorXd& eta_delta, const Eigen::VectorXd& xi_delta);
Eigen::VectorXd update_beta(const ChainState& state, const SubsetDesign& design, const Eigen::VectorXd& eta_delta,
                            const Eigen::VectorXd& xi_delta, Rng& rng, NumericsLog& log);

struct InverseGammaParams {
  double shape;
  double rate;
};

struct VarianceDraw {
  double sigma2;
  double sigma2_eta;
  double sigma2_xi;
  double sigma2_beta;
};

/// IG laws for (sigma2, sigma2_eta, sigma2_xi, sigma2_beta), in that order:
/// IG(a + n/2, b + r'r/2), IG(a + n/2, b + eta'eta/2), IG(a + n/2, b + xi'xi/2),
/// IG(a + p/2, b + beta'beta/2). With a = b = 1 these are the printed updates.
std::array<InverseGammaParams, 4> variance_conditionals(const Eigen::VectorXd& residual,
                                                        const Eigen::VectorXd& eta_delta,
                                                        const Eigen::VectorXd& xi_delta, const Eigen::VectorXd& beta,
                                                        double ig_shape = 1.0, double ig_rate = 1.0);
VarianceDraw update_variances(const Eigen::VectorXd& residual, const Eigen::VectorXd& eta_delta,
                              const Eigen::VectorXd& xi_delta, const Eigen::VectorXd& beta, Rng& rng,
                              double ig_shape = 1.0, double ig_rate = 1.0);

/// For every i in A outside the mask, eta_i ~ N(0, sigma2_eta) and
/// xi_i ~ N(0, sigma2_xi), written into `state`. The variances passed are the
/// previous iteration's. Returns the number of indices refreshed.
std::size_t draw_inactive_prediction_components(ChainState& state, const std::vector<std::size_t>& prediction_set,
                                                const SubsetMask& mask, double sigma2_eta, double sigma2_xi, Rng& rng);

/// Welford accumulator over equally sized vectors.
class RunningMoments {
 public:
  explicit RunningMoments(Eigen::Index size = 0);

  void push(const Eigen::VectorXd& value);
  std::size_t count() const noexcept { return count_; }
  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  /// Unbiased sample variance; zero until two values are pushed.
  Eigen::VectorXd variance() const;

 private:
  std::size_t count_ = 0;
  Eigen::VectorXd mean_;
  Eigen::VectorXd m2_;
};

struct TraceRow {
  std::size_t iteration;
  Eigen::VectorXd beta;
  double sigma2;
  double sigma2_eta;
  double sigma2_xi;
  double sigma2_beta;
};

struct ChainOutput {
  std::vector<std::size_t> prediction_set;
  Eigen::VectorXd mu_hat;  // mean of mu^[g] over g > g0
  Eigen::VectorXd mu_var;  // sample variance of mu^[g] over g > g0
  double elapsed_cpu_seconds = 0.0;
  double elapsed_wall_seconds = 0.0;
  std::size_t n_used = 0;
  std::size_t iterations_kept = 0;
  std::size_t jitter_events = 0;
  std::vector<TraceRow> trace;     // every iteration, when requested
  std::vector<SubsetMask> masks;   // every iteration, when requested
};

/// One chain of the subset Gibbs sampler at subset size n. Per iteration: a
/// fresh SRSWOR subset; eta_delta, xi_delta, beta from their full
/// conditionals at the previous variances; the four variances; prior draws
/// of the prediction-set components outside the subset at the previous
/// variances; then mu over the prediction set.
ChainOutput run_chain(const DatasetView& data, const SamplerConfig& config, std::size_t n);

/// The generic composite sampler: at each of `iterations` steps draw a fresh
/// subset of size n from `subsets` and then one value from
/// `conditional(mask, rng)`. Returns the conditional draws in order.
template <typename ConditionalSampler>
auto run_composite(SubsetSampler& subsets, std::size_t n, std::size_t iterations, Rng& rng,
                   ConditionalSampler&& conditional) {
  using Draw = decltype(conditional(std::declval<const SubsetMask&>(), rng));
  std::vector<Draw> draws;
  draws.reserve(iterations);
  for (std::size_t g = 0; g < iterations; ++g) {
    const SubsetMask mask = subsets.draw(n, rng);
    draws.push_back(conditional(mask, rng));
  }
  return draws;
}

}  // namespace dsm

#endif  // DSM_GIBBS_HPP
