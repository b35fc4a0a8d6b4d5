#include <doctest.h>

#include <cmath>

#include "dsm/model.hpp"

using namespace dsm;

namespace {
DatasetView line_data(std::size_t N, std::size_t p = 1) {
  DatasetView d = DatasetView::intercept_only(Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(N), -1.0, 1.0));
  if (p > 1) {
    d.x.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(p));
    for (Eigen::Index c = 1; c < d.x.cols(); ++c) d.x.col(c).setLinSpaced(0.0, static_cast<double>(c));
  }
  return d;
}
}  // namespace

TEST_CASE("subset mask validation") {
  CHECK_THROWS_AS(SubsetMask(5, {2, 1}), InvalidParameter);
  CHECK_THROWS_AS(SubsetMask(5, {1, 1}), InvalidParameter);
  CHECK_THROWS_AS(SubsetMask(5, {5}), InvalidParameter);
  const SubsetMask m(6, {0, 3, 5});
  CHECK(m.contains(3));
  CHECK_FALSE(m.contains(4));
  CHECK(m.indicator() == std::vector<bool>{true, false, false, true, false, true});
}

TEST_CASE("single-point basis is one") {
  const DatasetView d = line_data(4);
  const SubsetDesign s = build_subset_design(d, BasisConfig{2.7}, SubsetMask(4, {2}));
  CHECK(s.psi.rows() == 1);
  CHECK(s.psi(0, 0) == 1.0);
}

TEST_CASE("adjacent points with rho 0.3") {
  const DatasetView d = line_data(4);
  const SubsetDesign s = build_subset_design(d, BasisConfig{}, SubsetMask(4, {0, 1}));
  CHECK(s.psi(0, 1) == doctest::Approx(0.740818220681718).epsilon(1e-12));
  CHECK(s.psi(1, 0) == s.psi(0, 1));
}

TEST_CASE("subset basis is the principal submatrix of the full one") {
  const DatasetView d = line_data(9, 2);
  const BasisConfig basis{0.45};
  const SubsetDesign full = build_subset_design(d, basis, SubsetMask::all(9));
  CHECK(full.psi.isApprox(kernel_matrix(d.coords, basis), 0.0));
  const SubsetMask m(9, {1, 4, 5, 8});
  const SubsetDesign sub = build_subset_design(d, basis, m);
  for (Eigen::Index j = 0; j < 4; ++j) {
    CHECK(sub.y(j) == d.y(static_cast<Eigen::Index>(m.active()[j])));
    CHECK(sub.x.row(j) == d.x.row(static_cast<Eigen::Index>(m.active()[j])));
    for (Eigen::Index k = 0; k < 4; ++k) {
      CHECK(sub.psi(j, k) == full.psi(static_cast<Eigen::Index>(m.active()[j]), static_cast<Eigen::Index>(m.active()[k])));
    }
  }
  CHECK(sub.psi.isApprox(sub.psi.transpose(), 0.0));
  CHECK((sub.psi.diagonal().array() == 1.0).all());
}

TEST_CASE("exponential kernel on the line is positive definite") {
  const DatasetView d = line_data(30);
  for (double rho : {0.01, 0.3, 3.0}) {
    const Eigen::MatrixXd k = kernel_matrix(d.coords, BasisConfig{rho});
    CHECK(Eigen::LLT<Eigen::MatrixXd>(k).info() == Eigen::Success);
  }
}

TEST_CASE("great-circle kernel") {
  Eigen::MatrixXd c(3, 2);
  c << 0, 0, 0, 90, 90, 0;
  const BasisConfig basis{0.001, Metric::GreatCircle};
  const double quarter = M_PI / 2 * kEarthRadiusKm;
  CHECK(basis_distance(c.row(0), c.row(1), basis.metric) == doctest::Approx(quarter).epsilon(1e-12));
  CHECK(basis_distance(c.row(1), c.row(2), basis.metric) == doctest::Approx(quarter).epsilon(1e-12));
  const Eigen::MatrixXd k = kernel_matrix(c, basis);
  CHECK(k(0, 2) == doctest::Approx(std::exp(-0.001 * quarter)).epsilon(1e-12));
  CHECK(kernel_matrix(c, c, basis).isApprox(k, 1e-15));
}

TEST_CASE("kernel is expression friendly in the scalar type") {
  Eigen::Matrix<float, 3, 1> c(1.f, 2.f, 4.f);
  const auto k = kernel_matrix(c, BasisConfig{0.5});
  static_assert(std::is_same_v<decltype(k)::Scalar, float>);
  CHECK(k(0, 2) == doctest::Approx(std::exp(-1.5)).epsilon(1e-6));
}

TEST_CASE("predict_mu simple cases") {
  const DatasetView d = line_data(5);
  ChainState s = ChainState::initial(5, 1);
  const std::vector<std::size_t> A{0, 2, 4};
  CHECK(predict_mu(s, d, BasisConfig{}, A).isZero(0.0));

  s.beta(0) = 2.0;
  s.xi.setConstant(0.5);
  CHECK((predict_mu(s, d, BasisConfig{}, A).array() == 2.5).all());

  ChainState t = ChainState::initial(5, 1);
  t.eta(0) = 1.0;
  CHECK(predict_mu(t, d, BasisConfig{}, {0})(0) == 1.0);
}

TEST_CASE("predict_mu uses the kernel over A and is linear") {
  const DatasetView d = line_data(6, 2);
  const BasisConfig basis{0.3};
  const std::vector<std::size_t> A{1, 2, 5};
  Rng rng = make_rng(RngSeed{1});
  auto random_state = [&] {
    ChainState s = ChainState::initial(6, 2);
    s.beta = draw_standard_normal(2, rng);
    s.eta = draw_standard_normal(6, rng);
    s.xi = draw_standard_normal(6, rng);
    return s;
  };
  const ChainState a = random_state(), b = random_state();
  const Eigen::VectorXd mu = predict_mu(a, d, basis, A);
  for (std::size_t k = 0; k < A.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(A[k]);
    double expect = d.x.row(i).dot(a.beta) + a.xi(i);
    for (std::size_t j : A) expect += std::exp(-0.3 * std::abs(d.coords(i, 0) - d.coords(static_cast<Eigen::Index>(j), 0))) * a.eta(static_cast<Eigen::Index>(j));
    CHECK(mu(static_cast<Eigen::Index>(k)) == doctest::Approx(expect).epsilon(1e-12));
  }
  ChainState sum = a;
  sum.beta += b.beta;
  sum.eta += b.eta;
  sum.xi += b.xi;
  CHECK(predict_mu(sum, d, basis, A).isApprox(mu + predict_mu(b, d, basis, A), 1e-12));
}

TEST_CASE("validation rejects bad inputs") {
  DatasetView d = line_data(4);
  d.y(1) = std::nan("");
  CHECK_THROWS_AS(d.validate(), InvalidParameter);
  CHECK_THROWS_AS(BasisConfig{0.0}.validate(), InvalidParameter);
  CHECK_THROWS_AS(validate_index_set({2, 1}, 4, "A"), InvalidParameter);
  CHECK_THROWS_AS(validate_index_set({}, 4, "A"), InvalidParameter);
  CHECK_THROWS_AS(validate_index_set({4}, 4, "A"), InvalidParameter);
  FixedVariances v;
  v.sigma2_xi = 0.0;
  CHECK_THROWS_AS(v.validate(), InvalidParameter);

  SamplerConfig c;
  c.prediction_set = {0, 1};
  c.iterations = 10;
  c.burn_in = 10;
  CHECK_THROWS_AS(c.validate(4), InvalidParameter);
  c.burn_in = 9;
  CHECK_NOTHROW(c.validate(4));
  c.ig_rate = 0.0;
  CHECK_THROWS_AS(c.validate(4), InvalidParameter);
}
