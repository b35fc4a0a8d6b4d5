#include "dsm/gibbs.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <string>

namespace dsm {
namespace {

double thread_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<std::size_t>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out(static_cast<Eigen::Index>(k)) = v(static_cast<Eigen::Index>(idx[k]));
  return out;
}

void scatter(Eigen::VectorXd& v, const std::vector<std::size_t>& idx, const Eigen::VectorXd& values) {
  for (std::size_t k = 0; k < idx.size(); ++k) v(static_cast<Eigen::Index>(idx[k])) = values(static_cast<Eigen::Index>(k));
}

Eigen::MatrixXd eta_precision(const ChainState& s, const SubsetDesign& d) {
  Eigen::MatrixXd q(d.psi.cols(), d.psi.cols());
  q.setZero();
  q.selfadjointView<Eigen::Lower>().rankUpdate(d.psi.transpose(), 1.0 / s.sigma2);
  q.diagonal().array() += 1.0 / s.sigma2_eta;
  return q.selfadjointView<Eigen::Lower>();
}

Eigen::MatrixXd beta_precision(const ChainState& s, const SubsetDesign& d) {
  Eigen::MatrixXd q = d.x.transpose() * d.x / s.sigma2;
  q.diagonal().array() += 1.0 / s.sigma2_beta;
  return q;
}

}  // namespace

Eigen::VectorXd draw_gaussian_canonical(const Eigen::MatrixXd& precision, const Eigen::VectorXd& linear, Rng& rng,
                                        NumericsLog& log) {
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) {
    Eigen::MatrixXd jittered = precision;
    jittered.diagonal().array() += 1e-10 * precision.trace() / static_cast<double>(precision.rows());
    llt.compute(jittered);
    ++log.jitter_events;
    if (llt.info() != Eigen::Success) {
      throw NumericalError("Cholesky of the full-conditional precision failed (dim " +
                               std::to_string(precision.rows()) + ")",
                           static_cast<std::size_t>(precision.rows()));
    }
  }
  Eigen::VectorXd mean = llt.solve(linear);
  const Eigen::VectorXd z = draw_standard_normal(precision.rows(), rng);
  mean += llt.matrixU().solve(z);
  return mean;
}

GaussianConditional eta_conditional(const ChainState& state, const SubsetDesign& design,
                                    const Eigen::VectorXd& xi_delta) {
  const Eigen::MatrixXd q = eta_precision(state, design);
  const Eigen::VectorXd r = design.y - design.x * state.beta - xi_delta;
  Eigen::LLT<Eigen::MatrixXd> llt(q);
  GaussianConditional c;
  c.mean = llt.solve(design.psi.transpose() * r / state.sigma2);
  c.covariance = llt.solve(Eigen::MatrixXd::Identity(q.rows(), q.cols()));
  return c;
}

Eigen::VectorXd update_eta_active(const ChainState& state, const SubsetDesign& design, const Eigen::VectorXd& xi_delta,
                                  Rng& rng, NumericsLog& log) {
  const Eigen::VectorXd r = design.y - design.x * state.beta - xi_delta;
  return draw_gaussian_canonical(eta_precision(state, design), design.psi.transpose() * r / state.sigma2, rng, log);
}

IsotropicConditional xi_conditional(const ChainState& state, const SubsetDesign& design,
                                    const Eigen::VectorXd& eta_delta) {
  const double total = state.sigma2 + state.sigma2_xi;
  IsotropicConditional c;
  c.mean = (state.sigma2_xi / total) * (design.y - design.x * state.beta - design.psi * eta_delta);
  c.variance = state.sigma2 * state.sigma2_xi / total;
  return c;
}

Eigen::VectorXd update_xi_active(const ChainState& state, const SubsetDesign& design, const Eigen::VectorXd& eta_delta,
                                 Rng& rng) {
  IsotropicConditional c = xi_conditional(state, design, eta_delta);
  const double sd = std::sqrt(c.variance);
  for (Eigen::Index i = 0; i < c.mean.size(); ++i) c.mean(i) += sd * draw_standard_normal(rng);
  return c.mean;
}

GaussianConditional beta_conditional(const ChainState& state, const SubsetDesign& design,
                                     const Eigen::VectorXd& eta_delta, const Eigen::VectorXd& xi_delta) {
  const Eigen::MatrixXd q = beta_precision(state, design);
  const Eigen::VectorXd r = design.y - design.psi * eta_delta - xi_delta;
  Eigen::LLT<Eigen::MatrixXd> llt(q);
  GaussianConditional c;
  c.mean = llt.solve(design.x.transpose() * r / state.sigma2);
  c.covariance = llt.solve(Eigen::MatrixXd::Identity(q.rows(), q.cols()));
  return c;
}

Eigen::VectorXd update_beta(const ChainState& state, const SubsetDesign& design, const Eigen::VectorXd& eta_delta,
                            const Eigen::VectorXd& xi_delta, Rng& rng, NumericsLog& log) {
  const Eigen::VectorXd r = design.y - design.psi * eta_delta - xi_delta;
  return draw_gaussian_canonical(beta_precision(state, design), design.x.transpose() * r / state.sigma2, rng, log);
}

std::array<InverseGammaParams, 4> variance_conditionals(const Eigen::VectorXd& residual,
                                                        const Eigen::VectorXd& eta_delta,
                                                        const Eigen::VectorXd& xi_delta, const Eigen::VectorXd& beta,
                                                        double ig_shape, double ig_rate) {
  const double n = static_cast<double>(residual.size());
  const double p = static_cast<double>(beta.size());
  return {{
      {ig_shape + n / 2.0, ig_rate + residual.squaredNorm() / 2.0},
      {ig_shape + n / 2.0, ig_rate + eta_delta.squaredNorm() / 2.0},
      {ig_shape + n / 2.0, ig_rate + xi_delta.squaredNorm() / 2.0},
      {ig_shape + p / 2.0, ig_rate + beta.squaredNorm() / 2.0},
  }};
}

VarianceDraw update_variances(const Eigen::VectorXd& residual, const Eigen::VectorXd& eta_delta,
                              const Eigen::VectorXd& xi_delta, const Eigen::VectorXd& beta, Rng& rng, double ig_shape,
                              double ig_rate) {
  const auto laws = variance_conditionals(residual, eta_delta, xi_delta, beta, ig_shape, ig_rate);
  VarianceDraw v{};
  v.sigma2 = draw_inverse_gamma(laws[0].shape, laws[0].rate, rng);
  v.sigma2_eta = draw_inverse_gamma(laws[1].shape, laws[1].rate, rng);
  v.sigma2_xi = draw_inverse_gamma(laws[2].shape, laws[2].rate, rng);
  v.sigma2_beta = draw_inverse_gamma(laws[3].shape, laws[3].rate, rng);
  return v;
}

std::size_t draw_inactive_prediction_components(ChainState& state, const std::vector<std::size_t>& prediction_set,
                                                const SubsetMask& mask, double sigma2_eta, double sigma2_xi,
                                                Rng& rng) {
  std::size_t refreshed = 0;
  for (std::size_t i : prediction_set) {
    if (mask.contains(i)) continue;
    state.eta(static_cast<Eigen::Index>(i)) = draw_normal(0.0, sigma2_eta, rng);
    ++refreshed;
  }
  for (std::size_t i : prediction_set) {
    if (mask.contains(i)) continue;
    state.xi(static_cast<Eigen::Index>(i)) = draw_normal(0.0, sigma2_xi, rng);
  }
  return refreshed;
}

RunningMoments::RunningMoments(Eigen::Index size)
    : mean_(Eigen::VectorXd::Zero(size)), m2_(Eigen::VectorXd::Zero(size)) {}

void RunningMoments::push(const Eigen::VectorXd& value) {
  ++count_;
  const Eigen::VectorXd delta = value - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_.array() += delta.array() * (value - mean_).array();
}

Eigen::VectorXd RunningMoments::variance() const {
  if (count_ < 2) return Eigen::VectorXd::Zero(mean_.size());
  return m2_ / static_cast<double>(count_ - 1);
}

ChainOutput run_chain(const DatasetView& data, const SamplerConfig& config, std::size_t n) {
  data.validate();
  const std::size_t N = data.size();
  config.validate(N);
  if (data.coords.cols() != config.basis.coord_dims()) {
    throw InvalidParameter("coordinate columns do not match the basis metric");
  }

  const auto wall_start = std::chrono::steady_clock::now();
  const double cpu_start = thread_cpu_seconds();

  std::vector<std::size_t> eligible;
  eligible.reserve(N - config.holdout.size());
  for (std::size_t i = 0, h = 0; i < N; ++i) {
    if (h < config.holdout.size() && config.holdout[h] == i) {
      ++h;
      continue;
    }
    eligible.push_back(i);
  }
  if (config.fixed_subset) {
    n = config.fixed_subset->size();
  } else if (n < 1 || n > eligible.size()) {
    throw InvalidParameter("subset size must satisfy 1 <= n <= " + std::to_string(eligible.size()) + "; got " +
                           std::to_string(n));
  }

  SubsetSampler subsets(N, std::move(eligible));
  Rng rng = make_rng(config.seed);
  const PredictionBasis prediction(data, config.basis, config.prediction_set);

  ChainState state = ChainState::initial(N, data.covariates());
  if (config.fixed_variances) {
    state.sigma2 = config.fixed_variances->sigma2;
    state.sigma2_eta = config.fixed_variances->sigma2_eta;
    state.sigma2_xi = config.fixed_variances->sigma2_xi;
    state.sigma2_beta = config.fixed_variances->sigma2_beta;
  }

  ChainOutput out;
  out.prediction_set = config.prediction_set;
  out.n_used = n;
  out.iterations_kept = config.iterations - config.burn_in;
  if (config.record_trace) out.trace.reserve(config.iterations);
  if (config.record_masks) out.masks.reserve(config.iterations);

  RunningMoments moments(static_cast<Eigen::Index>(prediction.size()));
  NumericsLog numerics;
  SubsetDesign design;
  if (config.fixed_subset) design = build_subset_design(data, config.basis, *config.fixed_subset);

  for (std::size_t g = 1; g <= config.iterations; ++g) {
    try {
      const SubsetMask mask = config.fixed_subset ? *config.fixed_subset : subsets.draw(n, rng);
      if (!config.fixed_subset) design = build_subset_design(data, config.basis, mask);
      const auto& active = mask.active();

      // Conditionals below read the [g-1] variances held in `state`.
      const Eigen::VectorXd xi_prev = gather(state.xi, active);
      const Eigen::VectorXd eta_delta = update_eta_active(state, design, xi_prev, rng, numerics);
      scatter(state.eta, active, eta_delta);

      const Eigen::VectorXd xi_delta = update_xi_active(state, design, eta_delta, rng);
      scatter(state.xi, active, xi_delta);

      state.beta = update_beta(state, design, eta_delta, xi_delta, rng, numerics);

      const double prev_sigma2_eta = state.sigma2_eta;
      const double prev_sigma2_xi = state.sigma2_xi;
      if (!config.fixed_variances) {
        const Eigen::VectorXd residual = design.y - design.x * state.beta - design.psi * eta_delta - xi_delta;
        const VarianceDraw v =
            update_variances(residual, eta_delta, xi_delta, state.beta, rng, config.ig_shape, config.ig_rate);
        state.sigma2 = v.sigma2;
        state.sigma2_eta = v.sigma2_eta;
        state.sigma2_xi = v.sigma2_xi;
        state.sigma2_beta = v.sigma2_beta;
      }

      draw_inactive_prediction_components(state, config.prediction_set, mask, prev_sigma2_eta, prev_sigma2_xi, rng);

      const Eigen::VectorXd mu = prediction.evaluate(state);
      if (!mu.allFinite() || !state.beta.allFinite()) throw NumericalError("non-finite chain state", n);
      if (g > config.burn_in) moments.push(mu);

      if (config.record_trace) {
        out.trace.push_back({g, state.beta, state.sigma2, state.sigma2_eta, state.sigma2_xi, state.sigma2_beta});
      }
      if (config.record_masks) out.masks.push_back(mask);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " at iteration " + std::to_string(g) + " with n=" +
                               std::to_string(n),
                           n, g);
    }
  }

  out.mu_hat = moments.mean();
  out.mu_var = moments.variance();
  out.jitter_events = numerics.jitter_events;
  out.elapsed_cpu_seconds = thread_cpu_seconds() - cpu_start;
  out.elapsed_wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return out;
}

}  // namespace dsm
