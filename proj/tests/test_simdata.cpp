#include <doctest.h>

#include <cmath>
#include <set>

#include "dsm/calibrate.hpp"
#include "dsm/simdata.hpp"

using namespace dsm;

TEST_CASE("noiseless recursion from a fixed start") {
  Ar1Config c;
  c.N = 200;
  c.noise_var = 1e-300;
  c.initial_mu = 3.0;
  c.prediction_count = 10;
  const SimulatedSeries s = generate_ar1(c);
  for (Eigen::Index i = 0; i < 200; ++i) {
    CHECK(s.truth_mu(i) == doctest::Approx(3.0 * std::pow(0.9, static_cast<double>(i))).epsilon(1e-13));
  }
}

TEST_CASE("AR(1) moments at N = 1e6") {
  Ar1Config c;
  c.N = 1000000;
  c.seed = RngSeed{2024};
  c.prediction_count = 1000;
  const SimulatedSeries s = generate_ar1(c);
  const Eigen::VectorXd& mu = s.truth_mu;
  const double n = static_cast<double>(c.N);
  const double mean = mu.mean();
  const Eigen::VectorXd centred = mu.array() - mean;
  const double var = centred.squaredNorm() / n;
  const double lag1 = centred.head(c.N - 1).dot(centred.tail(c.N - 1)) / n / var;
  CHECK(std::abs(lag1 - 0.9) < 0.005);

  const double stationary = 0.1 / (1.0 - 0.81);
  // Large-sample variance of the sample variance of an AR(1).
  const double se = std::sqrt(2.0 * stationary * stationary * (1.0 + 0.81) / (1.0 - 0.81) / n);
  CHECK(std::abs(var - stationary) < 3.0 * se);

  const Eigen::VectorXd eps = s.data.y - mu;
  const double eps_var = (eps.array() - eps.mean()).square().sum() / n;
  CHECK(std::abs(eps_var - 0.1) < 0.002);

  CHECK(s.data.x.cols() == 1);
  CHECK((s.data.x.array() == 1.0).all());
  CHECK(s.data.coords(0, 0) == 1.0);
  CHECK(s.data.coords(999999, 0) == 1000000.0);
  CHECK(s.prediction_set.size() == 1000);
}

TEST_CASE("generator is deterministic and validates") {
  Ar1Config c;
  c.N = 500;
  c.prediction_count = 20;
  c.seed = RngSeed{7};
  const SimulatedSeries a = generate_ar1(c), b = generate_ar1(c);
  CHECK(a.data.y == b.data.y);
  CHECK(a.truth_mu == b.truth_mu);
  c.seed = RngSeed{8};
  CHECK_FALSE(generate_ar1(c).data.y == a.data.y);
  c.prediction_count = 501;
  CHECK_THROWS_AS(generate_ar1(c), InvalidParameter);
  c.prediction_count = 10;
  c.noise_var = 0.0;
  CHECK_THROWS_AS(generate_ar1(c), InvalidParameter);
}

TEST_CASE("equally spaced indices are block midpoints") {
  CHECK(equally_spaced_indices(10, 5) == std::vector<std::size_t>{1, 3, 5, 7, 9});
  CHECK(equally_spaced_indices(5, 5) == std::vector<std::size_t>{0, 1, 2, 3, 4});
  CHECK(equally_spaced_indices(100000, 1000).front() == 50);
  CHECK(equally_spaced_indices(100000, 1000).back() == 99950);
  CHECK_THROWS_AS(equally_spaced_indices(3, 4), InvalidParameter);
}

TEST_CASE("rmspe and rste") {
  const Eigen::Vector2d zero = Eigen::Vector2d::Zero(), one = Eigen::Vector2d::Ones();
  CHECK(rmspe(zero, zero) == 0.0);
  CHECK(rmspe(zero, one) == 1.0);
  CHECK(rste(Eigen::VectorXd::Constant(1, 3.0), Eigen::VectorXd::Constant(1, 1.0)) == 2.0);
  Rng rng = make_rng(RngSeed{1});
  const Eigen::VectorXd a = draw_standard_normal(50, rng), b = draw_standard_normal(50, rng);
  CHECK(rste(a, a) == 0.0);
  CHECK(rste(a, b) == rmspe(a, b));
  CHECK(rmspe(a, b) == doctest::Approx(rmspe(b, a)).epsilon(1e-15));
  CHECK(rmspe(a, b) == doctest::Approx(std::sqrt(pairwise_difference(a, b) / 50.0)).epsilon(1e-14));
  CHECK(rmspe(a, b) > 0.0);
  CHECK_THROWS_AS(rmspe(a, Eigen::VectorXd(a.head(3))), InvalidParameter);
}

TEST_CASE("holdout split partitions the data") {
  DatasetView d = DatasetView::intercept_only(Eigen::VectorXd::LinSpaced(100, 0.0, 99.0));
  Rng rng = make_rng(RngSeed{3});
  const SplitDataset s = split_holdout(d, 0.2, rng);
  CHECK(s.holdout_indices.size() == 20);
  CHECK(s.train_indices.size() == 80);
  CHECK(s.train.size() == 80);
  std::set<std::size_t> all(s.train_indices.begin(), s.train_indices.end());
  for (std::size_t i : s.holdout_indices) CHECK(all.insert(i).second);
  CHECK(all.size() == 100);
  for (std::size_t k = 0; k < 20; ++k) {
    CHECK(s.holdout_y(static_cast<Eigen::Index>(k)) == static_cast<double>(s.holdout_indices[k]));
  }
  for (std::size_t k = 0; k < 80; ++k) {
    CHECK(s.train.y(static_cast<Eigen::Index>(k)) == static_cast<double>(s.train_indices[k]));
    CHECK(s.train.coords(static_cast<Eigen::Index>(k), 0) == static_cast<double>(s.train_indices[k] + 1));
  }
  CHECK_THROWS_AS(split_holdout(d, 0.001, rng), InvalidParameter);
  CHECK_THROWS_AS(split_holdout(d, 1.0, rng), InvalidParameter);
}
