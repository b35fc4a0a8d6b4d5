#include "dsm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "dsm/gibbs.hpp"

namespace dsm::oracle {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double log_gaussian(const Eigen::VectorXd& v, const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("oracle: covariance not positive definite", 0);
  const Eigen::VectorXd w = llt.matrixL().solve(v);
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * (static_cast<double>(v.size()) * kLog2Pi + log_det + w.squaredNorm());
}

/// log N(v; 0, s I).
double log_isotropic(const Eigen::VectorXd& v, double s) {
  return -0.5 * (static_cast<double>(v.size()) * (kLog2Pi + std::log(s)) + v.squaredNorm() / s);
}

double log_normal_scalar(double v, double variance) { return -0.5 * (kLog2Pi + std::log(variance) + v * v / variance); }

struct SubsetPieces {
  Eigen::VectorXd y;
  Eigen::VectorXd x;
  Eigen::MatrixXd psi;
};

SubsetPieces pieces(const TinyModelSpec& spec, const SubsetMask& mask, const Eigen::VectorXd& y) {
  if (mask.universe() != spec.N) throw InvalidParameter("oracle: mask universe does not match N");
  if (mask.size() == 0) throw InvalidParameter("oracle: subset must hold at least one index (1 <= n)");
  if (y.size() != static_cast<Eigen::Index>(spec.N)) throw InvalidParameter("oracle: y has wrong length");
  const auto& a = mask.active();
  SubsetPieces p;
  p.y = gather_rows(y, a);
  p.x = gather_rows(spec.x, a);
  p.psi = kernel_matrix(gather_rows(spec.coords, a), spec.basis);
  return p;
}

/// Covariance of y_delta given beta (eta_delta, xi_delta and noise integrated out).
Eigen::MatrixXd covariance_given_beta(const TinyModelSpec& spec, const Eigen::MatrixXd& psi) {
  const FixedVariances& v = spec.variances;
  Eigen::MatrixXd c = v.sigma2_eta * psi * psi.transpose();
  c.diagonal().array() += v.sigma2 + v.sigma2_xi;
  return c;
}

/// Tensor-product Gauss-Hermite expectation of f over `dims` iid standard
/// normals. Nodes whose weight is below 1e-30 are dropped; the integrands
/// here are bounded densities, so the omitted mass is negligible.
template <typename F>
double tensor_expectation(const GaussHermiteRule& rule, int dims, F&& f) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < rule.nodes.size(); ++k) {
    if (rule.weights(k) > 1e-30) keep.push_back(k);
  }
  const std::size_t K = keep.size();
  std::vector<std::size_t> odo(static_cast<std::size_t>(dims), 0);
  Eigen::VectorXd z(dims);
  double total = 0.0;
  while (true) {
    double w = 1.0;
    for (int d = 0; d < dims; ++d) {
      const Eigen::Index k = keep[odo[static_cast<std::size_t>(d)]];
      z(d) = rule.nodes(k);
      w *= rule.weights(k);
    }
    total += w * f(z);
    int d = 0;
    while (d < dims && ++odo[static_cast<std::size_t>(d)] == K) odo[static_cast<std::size_t>(d++)] = 0;
    if (d == dims) break;
  }
  return total;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

TinyModelSpec TinyModelSpec::make(std::size_t N, std::size_t n, FixedVariances variances, double rho) {
  TinyModelSpec s;
  s.N = N;
  s.n = n;
  s.variances = variances;
  s.x = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(N));
  s.coords = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(N), 1.0, static_cast<double>(N));
  s.basis.rho = rho;
  s.validate();
  return s;
}

void TinyModelSpec::validate() const {
  if (N < 1 || N > 4) throw InvalidParameter("tiny model needs 1 <= N <= 4");
  if (n < 1 || n > N) throw InvalidParameter("tiny model needs 1 <= n <= N");
  if (subset_probability(N, n) < 1.0 / 6.0 - 1e-12) throw InvalidParameter("tiny model enumerates at most 6 subsets");
  variances.validate();
  basis.validate();
  if (x.size() != static_cast<Eigen::Index>(N) || coords.size() != static_cast<Eigen::Index>(N)) {
    throw InvalidParameter("tiny model x/coords must have length N");
  }
  if (quadrature_nodes < 2) throw InvalidParameter("need at least 2 quadrature nodes");
}

DatasetView TinyModelSpec::dataset(const Eigen::VectorXd& y) const {
  DatasetView d;
  d.y = y;
  d.x = x;
  d.coords = coords;
  d.validate();
  return d;
}

std::vector<SubsetMask> enumerate_subsets(std::size_t N, std::size_t n) {
  if (n < 1 || n > N) throw InvalidParameter("enumerate_subsets needs 1 <= n <= N");
  std::vector<SubsetMask> out;
  std::vector<bool> pick(N, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(n), true);
  // prev_permutation over a true-first selector yields lexicographic subsets.
  do {
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < N; ++i) {
      if (pick[i]) active.push_back(i);
    }
    out.emplace_back(N, std::move(active));
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return out;
}

double subset_probability(std::size_t N, std::size_t n) {
  return 1.0 / boost::math::binomial_coefficient<double>(static_cast<unsigned>(N), static_cast<unsigned>(n));
}

GaussHermiteRule gauss_hermite(std::size_t nodes) {
  if (nodes < 1) throw InvalidParameter("gauss_hermite needs at least one node");
  // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite polynomials.
  const auto K = static_cast<Eigen::Index>(nodes);
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(K, K);
  for (Eigen::Index k = 1; k < K; ++k) jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  GaussHermiteRule rule;
  rule.nodes = eig.eigenvalues();
  rule.weights = eig.eigenvectors().row(0).transpose().array().square();
  return rule;
}

Eigen::MatrixXd marginal_covariance(const TinyModelSpec& spec, const SubsetMask& mask) {
  const Eigen::VectorXd dummy = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.N));
  const SubsetPieces p = pieces(spec, mask, dummy);
  Eigen::MatrixXd c = covariance_given_beta(spec, p.psi);
  c.noalias() += spec.variances.sigma2_beta * p.x * p.x.transpose();
  return c;
}

double marginal_m(const TinyModelSpec& spec, const SubsetMask& mask, const Eigen::VectorXd& y) {
  const SubsetPieces p = pieces(spec, mask, y);
  const double value = std::exp(log_gaussian(p.y, marginal_covariance(spec, mask)));
  if (!std::isfinite(value) || !(value > 0.0)) throw NumericalError("marginal_m: non-finite result", mask.size());
  return value;
}

QuadratureBlock default_block(std::size_t n) {
  if (n == 1) return QuadratureBlock::BetaEtaXi;
  if (n == 2) return QuadratureBlock::BetaEta;
  return QuadratureBlock::Beta;
}

double marginal_m_quadrature(const TinyModelSpec& spec, const SubsetMask& mask, const Eigen::VectorXd& y,
                             QuadratureBlock block) {
  spec.validate();
  const SubsetPieces p = pieces(spec, mask, y);
  const GaussHermiteRule rule = gauss_hermite(spec.quadrature_nodes);
  const FixedVariances& v = spec.variances;
  const double sd_beta = std::sqrt(v.sigma2_beta), sd_eta = std::sqrt(v.sigma2_eta), sd_xi = std::sqrt(v.sigma2_xi);
  const auto n = p.y.size();

  double value = 0.0;
  switch (block) {
    case QuadratureBlock::Beta: {
      const Eigen::MatrixXd cov = covariance_given_beta(spec, p.psi);
      Eigen::LLT<Eigen::MatrixXd> llt(cov);
      const Eigen::MatrixXd L = llt.matrixL();
      const double log_norm = -0.5 * (static_cast<double>(n) * kLog2Pi) - L.diagonal().array().log().sum();
      const Eigen::VectorXd wy = L.triangularView<Eigen::Lower>().solve(p.y);
      const Eigen::VectorXd wx = L.triangularView<Eigen::Lower>().solve(p.x);
      value = tensor_expectation(rule, 1, [&](const Eigen::VectorXd& z) {
        return std::exp(log_norm - 0.5 * (wy - wx * (sd_beta * z(0))).squaredNorm());
      });
      break;
    }
    case QuadratureBlock::BetaEta: {
      if (n > 2) throw InvalidParameter("BetaEta quadrature limited to n <= 2 (3 dimensions)");
      const double s = v.sigma2 + v.sigma2_xi;
      value = tensor_expectation(rule, static_cast<int>(1 + n), [&](const Eigen::VectorXd& z) {
        const Eigen::VectorXd mean = p.x * (sd_beta * z(0)) + p.psi * (sd_eta * z.tail(n));
        return std::exp(log_isotropic(p.y - mean, s));
      });
      break;
    }
    case QuadratureBlock::BetaEtaXi: {
      if (n != 1) throw InvalidParameter("BetaEtaXi quadrature limited to n = 1 (3 dimensions)");
      const double y0 = p.y(0), x0 = p.x(0), psi0 = p.psi(0, 0);
      value = tensor_expectation(rule, 3, [&](const Eigen::VectorXd& z) {
        const double r = y0 - x0 * sd_beta * z(0) - psi0 * sd_eta * z(1) - sd_xi * z(2);
        return std::exp(log_normal_scalar(r, v.sigma2));
      });
      break;
    }
  }
  if (!std::isfinite(value) || !(value > 0.0)) throw NumericalError("marginal_m_quadrature: non-finite result", mask.size());
  return value;
}

double marginal_m_quadrature(const TinyModelSpec& spec, const SubsetMask& mask, const Eigen::VectorXd& y) {
  return marginal_m_quadrature(spec, mask, y, default_block(mask.size()));
}

std::string Proposition1Report::describe() const {
  std::ostringstream os;
  os.precision(12);
  os << "mixture marginal " << mixture_marginal << " vs m(1,y) " << full_marginal << ", rel err " << relative_error;
  return os.str();
}

Proposition1Report check_proposition1(const TinyModelSpec& spec, const Eigen::VectorXd& y, double tolerance) {
  spec.validate();
  const SubsetMask everything = SubsetMask::all(spec.N);
  const double full = marginal_m(spec, everything, y);
  const double prob = subset_probability(spec.N, spec.n);
  double total = 0.0;
  for (const SubsetMask& mask : enumerate_subsets(spec.N, spec.n)) {
    const double integral = marginal_m_quadrature(spec, mask, y);
    total += prob * integral * full / marginal_m(spec, mask, y);
  }
  Proposition1Report r{total, full, std::abs(total - full) / full, false};
  r.passed = r.relative_error <= tolerance;
  return r;
}

std::string Proposition3Report::describe() const {
  std::ostringstream os;
  os.precision(12);
  os << "Pr(delta|n) = " << expected_probability << ", " << recovered.size()
     << " recovered values, max abs err " << max_abs_error;
  return os.str();
}

Proposition3Report check_proposition3(const TinyModelSpec& spec, const std::vector<Eigen::VectorXd>& y_grid,
                                      double tolerance) {
  spec.validate();
  if (y_grid.empty()) throw InvalidParameter("check_proposition3 needs at least one y");
  Proposition3Report r{};
  r.expected_probability = subset_probability(spec.N, spec.n);
  const auto masks = enumerate_subsets(spec.N, spec.n);
  const SubsetMask everything = SubsetMask::all(spec.N);
  for (const auto& y : y_grid) {
    const double full = marginal_m(spec, everything, y);
    double sum = 0.0;
    for (const SubsetMask& mask : masks) {
      // Joint density of (delta, y): Pr(delta|n) * integral * m(1,y) / m(delta,y).
      const double joint = r.expected_probability * marginal_m_quadrature(spec, mask, y) * full / marginal_m(spec, mask, y);
      const double recovered = joint / full;
      r.recovered.push_back(recovered);
      r.max_abs_error = std::max(r.max_abs_error, std::abs(recovered - r.expected_probability));
      sum += recovered;
    }
    r.max_abs_error = std::max(r.max_abs_error, std::abs(sum - 1.0));
  }
  r.passed = r.max_abs_error <= tolerance;
  return r;
}

std::string PosteriorEquivalenceReport::describe() const {
  std::ostringstream os;
  if (vacuous) return "mask holds every index; nothing held out";
  os << grid_points << " grid points, max rel diff " << max_relative_difference;
  return os.str();
}

PosteriorEquivalenceReport check_posterior_equivalence(const TinyModelSpec& spec, const SubsetMask& mask,
                                                       const Eigen::VectorXd& y, const Eigen::VectorXd& y_perturbed,
                                                       double tolerance) {
  spec.validate();
  const SubsetPieces p = pieces(spec, mask, y);
  const SubsetPieces p2 = pieces(spec, mask, y_perturbed);
  if (p.y != p2.y) throw InvalidParameter("posterior equivalence: the two data vectors must agree on y_delta");

  PosteriorEquivalenceReport r;
  if (mask.size() == spec.N) {
    r.vacuous = true;
    return r;
  }

  const FixedVariances& v = spec.variances;
  const auto n = p.y.size();
  const bool with_eta = n <= 2;
  const int dims = with_eta ? static_cast<int>(1 + n) : 1;
  const double sd_beta = std::sqrt(v.sigma2_beta), sd_eta = std::sqrt(v.sigma2_eta);
  const double prob = subset_probability(spec.N, mask.size());
  const Eigen::MatrixXd cov_beta = covariance_given_beta(spec, p.psi);
  const SubsetMask everything = SubsetMask::all(spec.N);

  // Data-subset-model joint over the block in standardized coordinates z,
  // split into likelihood * reweighting (this part) and prior (the
  // quadrature weight, or its density at grid points). The reweighting
  // Pr(delta|n) m(1,y)/m(delta,y) is the only place y_{-delta} enters.
  auto log_weight = [&](const Eigen::VectorXd& yy) {
    return std::log(prob) + std::log(marginal_m(spec, everything, yy)) - std::log(marginal_m(spec, mask, yy));
  };
  const Eigen::LLT<Eigen::MatrixXd> cov_beta_llt(cov_beta);
  const Eigen::MatrixXd cov_beta_l = cov_beta_llt.matrixL();
  const double cov_beta_log_norm =
      -0.5 * static_cast<double>(n) * kLog2Pi - cov_beta_l.diagonal().array().log().sum();
  auto log_likelihood = [&](const Eigen::VectorXd& yd, const Eigen::VectorXd& z) {
    if (with_eta) {
      const Eigen::VectorXd mean = p.x * (sd_beta * z(0)) + p.psi * (sd_eta * z.tail(n));
      return log_isotropic(yd - mean, v.sigma2 + v.sigma2_xi);
    }
    const Eigen::VectorXd w = cov_beta_l.triangularView<Eigen::Lower>().solve(yd - p.x * (sd_beta * z(0)));
    return cov_beta_log_norm - 0.5 * w.squaredNorm();
  };

  const GaussHermiteRule rule = gauss_hermite(spec.quadrature_nodes);
  auto normalized_density = [&](const Eigen::VectorXd& yy) {
    const Eigen::VectorXd yd = gather_rows(yy, mask.active());
    const double lw = log_weight(yy);
    const double shift = log_likelihood(yd, Eigen::VectorXd::Zero(dims));
    const double log_z = lw + shift + std::log(tensor_expectation(rule, dims, [&](const Eigen::VectorXd& z) {
                           return std::exp(log_likelihood(yd, z) - shift);
                         }));
    return [=, &log_likelihood](const Eigen::VectorXd& z) {
      // Density with respect to the standardized block coordinates.
      double log_prior = 0.0;
      for (int d = 0; d < dims; ++d) log_prior += log_normal_scalar(z(d), 1.0);
      return std::exp(lw + log_likelihood(yd, z) + log_prior - log_z);
    };
  };

  const auto f1 = normalized_density(y);
  const auto f2 = normalized_density(y_perturbed);
  const std::array<double, 5> levels{-2.0, -1.0, 0.0, 1.0, 2.0};
  std::vector<std::size_t> odo(static_cast<std::size_t>(dims), 0);
  Eigen::VectorXd z(dims);
  while (true) {
    for (int d = 0; d < dims; ++d) z(d) = levels[odo[static_cast<std::size_t>(d)]];
    const double a = f1(z), b = f2(z);
    r.max_relative_difference = std::max(r.max_relative_difference, std::abs(a - b) / std::max(a, b));
    ++r.grid_points;
    int d = 0;
    while (d < dims && ++odo[static_cast<std::size_t>(d)] == levels.size()) odo[static_cast<std::size_t>(d++)] = 0;
    if (d == dims) break;
  }
  r.passed = r.max_relative_difference <= tolerance;
  return r;
}

std::vector<MixtureComponent> beta_mixture_posterior(const TinyModelSpec& spec, const Eigen::VectorXd& y) {
  spec.validate();
  const double prob = subset_probability(spec.N, spec.n);
  std::vector<MixtureComponent> out;
  for (const SubsetMask& mask : enumerate_subsets(spec.N, spec.n)) {
    const SubsetPieces p = pieces(spec, mask, y);
    Eigen::LLT<Eigen::MatrixXd> llt(covariance_given_beta(spec, p.psi));
    const Eigen::VectorXd sx = llt.solve(p.x);
    const double precision = 1.0 / spec.variances.sigma2_beta + p.x.dot(sx);
    out.push_back({prob, sx.dot(p.y) / precision, 1.0 / precision});
  }
  return out;
}

double mixture_cdf(const std::vector<MixtureComponent>& mixture, double x) {
  double c = 0.0;
  for (const auto& m : mixture) c += m.weight * normal_cdf((x - m.mean) / std::sqrt(m.variance));
  return c;
}

double mixture_quantile(const std::vector<MixtureComponent>& mixture, double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidParameter("mixture_quantile needs 0 < p < 1");
  double lo = mixture.front().mean, hi = lo;
  for (const auto& m : mixture) {
    lo = std::min(lo, m.mean - 40.0 * std::sqrt(m.variance));
    hi = std::max(hi, m.mean + 40.0 * std::sqrt(m.variance));
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mixture_cdf(mixture, mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Eigen::VectorXd exact_conditional_draw(const TinyModelSpec& spec, const Eigen::VectorXd& y, const SubsetMask& mask,
                                       Rng& rng) {
  const SubsetPieces p = pieces(spec, mask, y);
  const auto n = p.y.size();
  const FixedVariances& v = spec.variances;
  Eigen::MatrixXd design(n, 1 + 2 * n);
  design << p.x, p.psi, Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd prior_precision(1 + 2 * n);
  prior_precision << 1.0 / v.sigma2_beta, Eigen::VectorXd::Constant(n, 1.0 / v.sigma2_eta),
      Eigen::VectorXd::Constant(n, 1.0 / v.sigma2_xi);
  Eigen::MatrixXd q = design.transpose() * design / v.sigma2;
  q.diagonal() += prior_precision;
  NumericsLog log;
  return draw_gaussian_canonical(q, design.transpose() * p.y / v.sigma2, rng, log);
}

std::string ChiSquaredReport::describe() const {
  std::ostringstream os;
  os << draws << " draws, " << bins << " bins, chi2 = " << statistic << ", p = " << p_value;
  return os.str();
}

ChiSquaredReport chi_squared_against_mixture(const std::vector<double>& samples,
                                             const std::vector<MixtureComponent>& mixture, std::size_t bins,
                                             double significance) {
  if (bins < 2 || samples.empty()) throw InvalidParameter("chi-squared test needs >= 2 bins and samples");
  std::vector<double> edges;
  for (std::size_t k = 1; k < bins; ++k) {
    edges.push_back(mixture_quantile(mixture, static_cast<double>(k) / static_cast<double>(bins)));
  }
  std::vector<std::size_t> counts(bins, 0);
  for (double s : samples) {
    ++counts[static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), s) - edges.begin())];
  }
  const double expected = static_cast<double>(samples.size()) / static_cast<double>(bins);
  ChiSquaredReport r;
  r.draws = samples.size();
  r.bins = bins;
  for (std::size_t c : counts) r.statistic += (static_cast<double>(c) - expected) * (static_cast<double>(c) - expected) / expected;
  r.p_value = boost::math::gamma_q(0.5 * static_cast<double>(bins - 1), 0.5 * r.statistic);
  r.passed = r.p_value > significance;
  return r;
}

ChiSquaredReport check_proposition6(const TinyModelSpec& spec, const Eigen::VectorXd& y, std::size_t draws,
                                    RngSeed seed, std::size_t bins, double significance) {
  spec.validate();
  SubsetSampler subsets(spec.N);
  Rng rng = make_rng(seed);
  const auto beta_draws = run_composite(subsets, spec.n, draws, rng, [&](const SubsetMask& mask, Rng& r) {
    return exact_conditional_draw(spec, y, mask, r)(0);
  });
  return chi_squared_against_mixture(beta_draws, beta_mixture_posterior(spec, y), bins, significance);
}

}  // namespace dsm::oracle
