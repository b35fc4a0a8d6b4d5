#include <doctest.h>

#include <cmath>

#include "dsm/oracle.hpp"

using namespace dsm;
using namespace dsm::oracle;

namespace {
Eigen::VectorXd random_y(std::size_t N, Rng& rng) { return 1.5 * draw_standard_normal(static_cast<Eigen::Index>(N), rng); }
}  // namespace

TEST_CASE("gauss-hermite integrates normal moments") {
  const GaussHermiteRule r = gauss_hermite(40);
  CHECK(r.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.weights.dot(r.nodes.array().square().matrix()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.weights.dot(r.nodes.array().pow(4).matrix()) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(std::abs(r.weights.dot(r.nodes.array().pow(3).matrix())) < 1e-12);
}

TEST_CASE("single observation marginal is N(0, 4)") {
  const TinyModelSpec spec = TinyModelSpec::make(1, 1);
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(1, 0.8);
  const double expect = std::exp(-0.8 * 0.8 / 8.0) / std::sqrt(2.0 * M_PI * 4.0);
  CHECK(marginal_m(spec, SubsetMask::all(1), y) == doctest::Approx(expect).epsilon(1e-14));
  CHECK(std::abs(marginal_m_quadrature(spec, SubsetMask::all(1), y) - expect) < 1e-6 * expect);
}

TEST_CASE("tiny model validation") {
  CHECK_THROWS_AS(TinyModelSpec::make(2, 0).validate(), InvalidParameter);
  CHECK_THROWS_AS(TinyModelSpec::make(2, 3).validate(), InvalidParameter);
  CHECK_THROWS_AS(TinyModelSpec::make(5, 2).validate(), InvalidParameter);
  const TinyModelSpec spec = TinyModelSpec::make(2, 1);
  CHECK_THROWS(marginal_m(spec, SubsetMask(2, {}), Eigen::Vector2d::Zero()));
}

TEST_CASE("enumeration and subset probability") {
  CHECK(enumerate_subsets(3, 2).size() == 3);
  CHECK(enumerate_subsets(3, 2).front().active() == std::vector<std::size_t>{0, 1});
  CHECK(enumerate_subsets(4, 2).size() == 6);
  CHECK(subset_probability(3, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(subset_probability(4, 4) == 1.0);
}

TEST_CASE("quadrature agrees with the closed form for every block") {
  Rng rng = make_rng(RngSeed{12});
  FixedVariances v{0.7, 1.3, 0.4, 2.0};
  for (std::size_t N : {2u, 3u}) {
    for (std::size_t n = 1; n <= N; ++n) {
      const TinyModelSpec spec = TinyModelSpec::make(N, n, v);
      const Eigen::VectorXd y = random_y(N, rng);
      for (const SubsetMask& m : enumerate_subsets(N, n)) {
        const double exact = marginal_m(spec, m, y);
        CHECK(std::abs(marginal_m_quadrature(spec, m, y) - exact) < 1e-6 * exact);
        CHECK(std::abs(marginal_m_quadrature(spec, m, y, QuadratureBlock::Beta) - exact) < 1e-6 * exact);
        if (n <= 2) CHECK(std::abs(marginal_m_quadrature(spec, m, y, QuadratureBlock::BetaEta) - exact) < 1e-6 * exact);
        if (n == 1) CHECK(std::abs(marginal_m_quadrature(spec, m, y, QuadratureBlock::BetaEtaXi) - exact) < 1e-6 * exact);
      }
    }
  }
}

TEST_CASE("reweighted subset marginals mix back to the full marginal") {
  const Eigen::Vector2d y(0.3, -1.1);
  CHECK(check_proposition1(TinyModelSpec::make(2, 1), y).passed);
  const Proposition1Report full = check_proposition1(TinyModelSpec::make(2, 2), y);
  CHECK(full.passed);
  CHECK(full.relative_error < 1e-10);

  Rng rng = make_rng(RngSeed{99});
  for (int r = 0; r < 20; ++r) {
    const Eigen::VectorXd y3 = random_y(3, rng);
    const Proposition1Report rep = check_proposition1(TinyModelSpec::make(3, 1 + r % 3), y3);
    CHECK_MESSAGE(rep.passed, rep.describe());
  }
}

TEST_CASE("subset probability is recovered from the joint") {
  const std::vector<Eigen::VectorXd> grid{Eigen::Vector2d(0.3, -1.1), Eigen::Vector2d(2.0, 2.0),
                                          Eigen::Vector2d(-3.0, 0.5)};
  const Proposition3Report r = check_proposition3(TinyModelSpec::make(2, 1), grid);
  CHECK(r.passed);
  CHECK(r.recovered.size() == 6);
  for (double p : r.recovered) CHECK(std::abs(p - 0.5) < 1e-6);

  const Proposition3Report all = check_proposition3(TinyModelSpec::make(2, 2), grid);
  CHECK(all.passed);
  for (double p : all.recovered) CHECK(std::abs(p - 1.0) < 1e-6);
}

TEST_CASE("conditional posterior ignores held-out observations") {
  const TinyModelSpec spec = TinyModelSpec::make(2, 1);
  const Eigen::Vector2d y(0.4, -0.2);
  const SubsetMask keep_first(2, {0});
  const PosteriorEquivalenceReport r = check_posterior_equivalence(spec, keep_first, y, Eigen::Vector2d(0.4, 4.8));
  CHECK(r.passed);
  CHECK_FALSE(r.vacuous);
  CHECK(r.grid_points > 0);
  CHECK(r.max_relative_difference < 1e-10);

  const PosteriorEquivalenceReport v = check_posterior_equivalence(TinyModelSpec::make(2, 2), SubsetMask::all(2), y, y);
  CHECK(v.vacuous);
  CHECK(v.passed);

  Rng rng = make_rng(RngSeed{5});
  const TinyModelSpec spec3 = TinyModelSpec::make(3, 2);
  for (int k = 0; k < 10; ++k) {
    const Eigen::VectorXd y3 = random_y(3, rng);
    Eigen::VectorXd moved = y3;
    moved(2) += 4.0 * draw_standard_normal(rng);
    CHECK(check_posterior_equivalence(spec3, SubsetMask(3, {0, 1}), y3, moved).passed);
  }
}

TEST_CASE("mixture cdf and quantile are inverse") {
  const TinyModelSpec spec = TinyModelSpec::make(3, 2);
  const auto mix = beta_mixture_posterior(spec, Eigen::Vector3d(0.5, -1.0, 2.0));
  CHECK(mix.size() == 3);
  double w = 0.0;
  for (const auto& c : mix) w += c.weight;
  CHECK(w == doctest::Approx(1.0));
  for (double p : {0.01, 0.3, 0.5, 0.77, 0.99}) {
    CHECK(mixture_cdf(mix, mixture_quantile(mix, p)) == doctest::Approx(p).epsilon(1e-9));
  }
}

TEST_CASE("composite sampler matches the mixture and the test has power") {
  const TinyModelSpec spec = TinyModelSpec::make(3, 2);
  const Eigen::Vector3d y(0.5, -1.0, 2.0);
  const ChiSquaredReport r = check_proposition6(spec, y, 20000, RngSeed{3});
  CHECK_MESSAGE(r.passed, r.describe());
  CHECK(r.bins == 20);

  // Shifted samples must be rejected.
  auto mix = beta_mixture_posterior(spec, y);
  Rng rng = make_rng(RngSeed{4});
  std::vector<double> shifted;
  for (int k = 0; k < 20000; ++k) {
    const Eigen::VectorXd draw = exact_conditional_draw(spec, y, SubsetMask(3, {0, 1}), rng);
    shifted.push_back(draw(0) + 0.1);
  }
  CHECK_FALSE(chi_squared_against_mixture(shifted, mix, 20, 1e-3).passed);
}
