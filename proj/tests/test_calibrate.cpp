#include <doctest.h>

#include <atomic>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "dsm/calibrate.hpp"
#include "dsm/simdata.hpp"

using namespace dsm;

namespace {

// Stand-in chain whose timing is a fixed function of n.
ChainRunner fake_runner(std::function<double(std::size_t)> seconds) {
  return [seconds](const DatasetView&, const SamplerConfig& c, std::size_t n) {
    ChainOutput out;
    out.prediction_set = c.prediction_set;
    Rng rng = make_rng(c.seed);
    out.mu_hat = draw_standard_normal(static_cast<Eigen::Index>(c.prediction_set.size()), rng);
    out.mu_var = Eigen::VectorXd::Zero(out.mu_hat.size());
    out.n_used = n;
    out.elapsed_wall_seconds = seconds(n);
    out.elapsed_cpu_seconds = 0.5 * seconds(n);
    return out;
  };
}

SamplerConfig small_config() {
  SamplerConfig c;
  c.iterations = 60;
  c.burn_in = 20;
  c.prediction_set = {0, 5, 10, 15};
  c.seed = RngSeed{13};
  return c;
}

}  // namespace

TEST_CASE("budget selection") {
  const std::vector<GridTiming> laptop{{100, 250.0}, {162, 300.0}, {175, 331.0}};
  BudgetSelection s = select_budget_n(laptop, 300.0);
  CHECK(s.n == 162);
  CHECK(s.budget_met);

  const std::vector<GridTiming> slow{{10, 400.0}, {20, 350.0}, {30, 500.0}};
  s = select_budget_n(slow, 300.0);
  CHECK(s.n == 20);
  CHECK_FALSE(s.budget_met);

  const std::vector<GridTiming> tied{{10, 200.0}, {20, 200.0}, {30, 301.0}};
  CHECK(select_budget_n(tied, 300.0).n == 20);

  CHECK_THROWS_AS(select_budget_n({}, 300.0), InvalidParameter);
}

TEST_CASE("adding a point farther from the budget keeps the selection") {
  std::vector<GridTiming> t{{100, 250.0}, {162, 290.0}, {175, 331.0}};
  const std::size_t before = select_budget_n(t, 300.0).n;
  t.push_back({50, 120.0});
  t.push_back({190, 360.0});
  CHECK(select_budget_n(t, 300.0).n == before);
}

TEST_CASE("pairwise difference") {
  const Eigen::Vector2d a(1, 0), b(0, 1);
  CHECK(pairwise_difference(a, a) == 0.0);
  CHECK(pairwise_difference(a, b) == 2.0);
  Rng rng = make_rng(RngSeed{6});
  const Eigen::VectorXd u = draw_standard_normal(30, rng), v = draw_standard_normal(30, rng);
  double brute = 0.0;
  for (Eigen::Index i = 0; i < 30; ++i) brute += (u(i) - v(i)) * (u(i) - v(i));
  CHECK(pairwise_difference(u, v) == doctest::Approx(brute).epsilon(1e-14));
  CHECK(pairwise_difference(u, v) == pairwise_difference(v, u));
  CHECK(pairwise_difference(u, v) > 0.0);
}

TEST_CASE("sweep with an injected timer picks the laptop point") {
  const DatasetView data = DatasetView::intercept_only(Eigen::VectorXd::Zero(200));
  SweepPlan plan;
  plan.n_grid = {100, 162, 175};
  plan.budget_seconds = 300.0;
  auto timer = [](std::size_t n) { return n == 100 ? 250.0 : n == 162 ? 300.0 : 331.0; };
  const CalibrationReport r = run_sweep(data, small_config(), plan, fake_runner(timer));
  CHECK(r.selected_n == 162);
  CHECK(r.budget_met);
  CHECK(r.pairwise_diffs.size() == 2);

  plan.time_basis = TimeBasis::Cpu;  // cpu = half the wall time in the fake
  CHECK(run_sweep(data, small_config(), plan, fake_runner(timer)).selected_n == 175);
}

TEST_CASE("singleton grid and failed chains") {
  const DatasetView data = DatasetView::intercept_only(Eigen::VectorXd::Zero(50));
  SweepPlan plan;
  plan.n_grid = {7};
  const CalibrationReport r = run_sweep(data, small_config(), plan, fake_runner([](std::size_t) { return 1e9; }));
  CHECK(r.selected_n == 7);
  CHECK_FALSE(r.budget_met);
  CHECK(r.pairwise_diffs.empty());

  plan.n_grid = {5, 6, 7};
  ChainRunner flaky = [inner = fake_runner([](std::size_t) { return 1.0; })](const DatasetView& d,
                                                                          const SamplerConfig& c, std::size_t n) {
    if (n == 6) throw NumericalError("boom", n);
    return inner(d, c, n);
  };
  const CalibrationReport f = run_sweep(data, small_config(), plan, flaky);
  CHECK_FALSE(f.per_n[1].output.has_value());
  CHECK(f.per_n[1].error.find("boom") != std::string::npos);
  CHECK(std::isnan(f.pairwise_diffs[0].squared_norm));
  CHECK(f.selected_n == 7);
  std::ostringstream csv;
  write_report_csv(csv, f);
  CHECK(csv.str() == "n,wall_seconds,cpu_seconds,diff_to_next\n5,1,0.5,\n6,,,\n7,1,0.5,\n");
  const auto j = nlohmann::json::parse(summary_json(f, plan));
  CHECK(j["failed"] == 1);
  CHECK(j["selected_n"] == 7);
  CHECK(j["grid_size"] == 3);

  ChainRunner broken = [](const DatasetView&, const SamplerConfig&, std::size_t n) -> ChainOutput {
    throw NumericalError("always", n);
  };
  CHECK_THROWS_AS(run_sweep(data, small_config(), plan, broken), NumericalError);
}

TEST_CASE("identical chains give zero difference") {
  const DatasetView data = DatasetView::intercept_only(Eigen::VectorXd::Zero(50));
  SweepPlan plan;
  plan.n_grid = {5, 6};
  ChainRunner same = [](const DatasetView&, const SamplerConfig& c, std::size_t n) {
    ChainOutput out;
    out.mu_hat = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(c.prediction_set.size()), 0.25);
    out.n_used = n;
    return out;
  };
  CHECK(run_sweep(data, small_config(), plan, same).pairwise_diffs[0].squared_norm == 0.0);
}

TEST_CASE("sweep numerics do not depend on max_parallel") {
  Ar1Config ac;
  ac.N = 300;
  ac.prediction_count = 20;
  ac.seed = RngSeed{4};
  const SimulatedSeries sim = generate_ar1(ac);
  SamplerConfig c = small_config();
  c.prediction_set = sim.prediction_set;
  c.iterations = 150;
  c.burn_in = 50;
  SweepPlan plan;
  plan.n_grid = {5, 10, 15, 20, 25};
  plan.max_parallel = 1;
  const CalibrationReport serial = run_sweep(sim.data, c, plan);
  plan.max_parallel = 4;
  const CalibrationReport parallel = run_sweep(sim.data, c, plan);
  for (std::size_t k = 0; k < plan.n_grid.size(); ++k) {
    REQUIRE(serial.per_n[k].output);
    REQUIRE(parallel.per_n[k].output);
    CHECK(serial.per_n[k].n == parallel.per_n[k].n);
    CHECK(serial.per_n[k].output->mu_hat == parallel.per_n[k].output->mu_hat);
    CHECK(serial.per_n[k].output->mu_var == parallel.per_n[k].output->mu_var);
  }
  for (std::size_t k = 0; k + 1 < plan.n_grid.size(); ++k) {
    CHECK(serial.pairwise_diffs[k].squared_norm == parallel.pairwise_diffs[k].squared_norm);
  }
}

TEST_CASE("sweep plan validation") {
  SweepPlan p;
  p.n_grid = {};
  CHECK_THROWS_AS(p.validate(10), InvalidParameter);
  p.n_grid = {3, 3};
  CHECK_THROWS_AS(p.validate(10), InvalidParameter);
  p.n_grid = {3, 11};
  CHECK_THROWS_AS(p.validate(10), InvalidParameter);
  p.n_grid = {3, 4};
  p.budget_seconds = 0.0;
  CHECK_THROWS_AS(p.validate(10), InvalidParameter);
  p.budget_seconds = 1.0;
  p.max_parallel = 0;
  CHECK_THROWS_AS(p.validate(10), InvalidParameter);
}
