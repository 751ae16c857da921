#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "testing.hpp"
#include "zoflat/diagnostics.hpp"
#include "zoflat/estimators.hpp"
#include "zoflat/optimizer.hpp"
#include "zoflat/problems.hpp"
#include "zoflat/rng.hpp"

using namespace zoflat;
using namespace zoflat::testing;

TEST_CASE("descent on a linear objective takes exact dyadic steps") {
  // eta and c are dyadic, so every update is exact in floating point and the
  // iterate is x0 - T*eta*c bit for bit.
  const LinearObjective p(Vec{1.0, -2.0});
  const Vec x0 = {0.0, 0.0};
  const Trajectory traj = run_gd(p, 0.125, 100, x0);
  CHECK(traj.final_x[0] == -12.5);
  CHECK(traj.final_x[1] == 25.0);
  CHECK(traj.steps == 100);
  CHECK(traj.selected_iter == 100);
  CHECK(traj.selected_x == traj.final_x);
  CHECK(traj.records.size() == 101);
  CHECK(traj.records.back().loss == p.value(traj.final_x));
}

TEST_CASE("descent loss is monotone on a convex quadratic in the stable regime") {
  const QuadraticProblem p = QuadraticProblem::diagonal({4.0, 1.0, 0.25});
  const Vec x0 = {1.0, -2.0, 3.0};
  const Trajectory traj = run_gd(p, 0.4, 200, x0);  // eta < 2/4
  for (std::size_t i = 1; i < traj.records.size(); ++i) {
    CHECK(traj.records[i].loss <= traj.records[i - 1].loss + 1e-15);
  }
  CHECK(traj.records.back().loss < 1e-8);
}

TEST_CASE("recording grid is 0, r, 2r, ..., T for both optimizers") {
  const QuadraticProblem p = QuadraticProblem::diagonal({1.0, 2.0});
  const Vec x0 = {1.0, 1.0};

  const Trajectory gd = run_gd(p, 0.1, 10, x0, {}, 3);
  std::vector<long long> iters;
  for (const auto& r : gd.records) iters.push_back(r.iter);
  CHECK(iters == std::vector<long long>{0, 3, 6, 9, 10});

  OptimizerConfig cfg;
  cfg.eta = 0.01;
  cfg.lambda = 0.1;
  cfg.T = 9;
  cfg.record_every = 3;
  const Trajectory zo = run_zo(p, cfg, x0);
  iters.clear();
  for (const auto& r : zo.records) iters.push_back(r.iter);
  CHECK(iters == std::vector<long long>{0, 3, 6, 9});
}

TEST_CASE("two-point runs replay bit-identically for a fixed seed and stream") {
  const BilinearProblem p(3);
  RngStream init(3, stream_id::kInit);
  const Vec x0 = init.gaussian_vector(6);

  OptimizerConfig cfg;
  cfg.eta = 0.005;
  cfg.lambda = 0.1;
  cfg.T = 500;
  cfg.seed = 3;
  cfg.stream = 1;
  cfg.record_every = 50;

  const Trajectory a = run_zo(p, cfg, x0);
  const Trajectory b = run_zo(p, cfg, x0);
  CHECK(a.final_x == b.final_x);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].loss == b.records[i].loss);
  }

  cfg.stream = 2;
  const Trajectory c = run_zo(p, cfg, x0);
  CHECK(c.final_x != a.final_x);
}

TEST_CASE("two-point runs use exactly two evaluations per step plus records") {
  const BilinearProblem inner(2);
  const CountingProblem p(inner);
  OptimizerConfig cfg;
  cfg.eta = 0.001;
  cfg.lambda = 0.1;
  cfg.T = 100;
  cfg.record_every = 7;
  const Trajectory traj = run_zo(p, cfg, Vec{1.0, 0.0, 0.0, 1.0});
  const long long records = static_cast<long long>(traj.records.size());
  CHECK(p.value_calls == 2 * 100 + records);
}

TEST_CASE("the uniform output rule picks every iterate equally often") {
  // tau is drawn before the run from {0, ..., T-1}; chi-square over 10 bins
  // at 1e4 runs, 1e-3 critical value for 9 degrees of freedom.
  const QuadraticProblem p = QuadraticProblem::diagonal({1.0});
  OptimizerConfig cfg;
  cfg.eta = 0.1;
  cfg.lambda = 0.05;
  cfg.T = 10;
  cfg.output_rule = OutputRule::kUniformRandomIterate;
  std::vector<long long> counts(10, 0);
  const int runs = 10000;
  for (int s = 0; s < runs; ++s) {
    cfg.seed = static_cast<std::uint64_t>(s);
    const Trajectory t = run_zo(p, cfg, Vec{1.0});
    REQUIRE(t.selected_iter >= 0);
    REQUIRE(t.selected_iter < 10);
    ++counts[static_cast<std::size_t>(t.selected_iter)];
  }
  const double expected = runs / 10.0;
  double chi2 = 0.0;
  for (const long long c : counts) {
    const double d = static_cast<double>(c) - expected;
    chi2 += d * d / expected;
  }
  CHECK(chi2 < 27.877);
}

TEST_CASE("the averaged output rule returns the running mean of iterates") {
  const LinearObjective p(Vec{2.0});
  OptimizerConfig cfg;
  cfg.eta = 0.25;
  cfg.lambda = 0.5;
  cfg.T = 4;
  cfg.output_rule = OutputRule::kAverage;
  cfg.seed = 9;
  const Trajectory t = run_zo(p, cfg, Vec{0.0});
  CHECK(t.selected_iter == -1);
  // Mean of the pre-update iterates x_0..x_{T-1}: replay the updates by hand
  // from the same stream.
  RngStream rng(9, 0);
  double x = 0.0, sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    sum += x;
    const double u = rng.next_gaussian();
    x -= 0.25 * (2.0 * u) * u;  // coeff = c'u for a linear objective
  }
  CHECK(t.selected_x[0] == doctest::Approx(sum / 4.0).epsilon(1e-12));
  CHECK(t.final_x[0] == doctest::Approx(x).epsilon(1e-12));
}

TEST_CASE("gradient descent refuses the uniform output rule") {
  const QuadraticProblem p = QuadraticProblem::diagonal({1.0});
  CHECK_THROWS_AS(run_gd(p, 0.1, 5, Vec{1.0}, {}, 1,
                         OutputRule::kUniformRandomIterate),
                  std::invalid_argument);
}

TEST_CASE("config validation rejects unusable settings") {
  const QuadraticProblem p = QuadraticProblem::diagonal({1.0});
  OptimizerConfig cfg;
  cfg.eta = 0.1;
  cfg.lambda = 0.1;
  cfg.T = 0;
  CHECK_THROWS_AS(run_zo(p, cfg, Vec{1.0}), std::invalid_argument);
  cfg.T = 5;
  cfg.record_every = 0;
  CHECK_THROWS_AS(run_zo(p, cfg, Vec{1.0}), std::invalid_argument);
  cfg.record_every = 1;
  cfg.eta = -0.1;
  CHECK_THROWS_AS(run_zo(p, cfg, Vec{1.0}), std::invalid_argument);
}

TEST_CASE("limit mode requires a gradient") {
  struct ValueOnly : Problem {
    std::size_t dim() const override { return 1; }
    double value(const Vec& x) const override { return x[0] * x[0]; }
  } p;
  OptimizerConfig cfg;
  cfg.eta = 0.1;
  cfg.lambda = 0.0;
  cfg.T = 5;
  CHECK_THROWS_AS(run_zo(p, cfg, Vec{1.0}), std::invalid_argument);
}

TEST_CASE("divergence surfaces as an error carrying the partial trajectory") {
  const QuadraticProblem p = QuadraticProblem::diagonal({1.0, 1.0});
  const Vec x0 = {1.0, 1.0};

  SUBCASE("descent with a wildly unstable stepsize") {
    try {
      run_gd(p, 10.0, 1000, x0, {}, 1);
      FAIL("expected divergence");
    } catch (const DivergenceError& e) {
      CHECK(e.partial.steps > 0);
      CHECK(e.partial.steps < 1000);
      CHECK_FALSE(e.partial.records.empty());
      CHECK(e.partial.final_x.size() == 2);
    }
  }
  SUBCASE("two-point with a wildly unstable stepsize") {
    OptimizerConfig cfg;
    cfg.eta = 100.0;
    cfg.lambda = 0.1;
    cfg.T = 10000;
    try {
      run_zo(p, cfg, x0);
      FAIL("expected divergence");
    } catch (const DivergenceError& e) {
      CHECK(e.partial.steps < 10000);
      CHECK_FALSE(e.partial.records.empty());
    }
  }
}

TEST_CASE("diagnostics hooks populate the optional record columns") {
  const BilinearProblem p(2);
  DiagnosticsHooks hooks;
  hooks.hessian_trace = [&](const Vec& x) { return p.hessian_trace(x); };
  hooks.balance = [](const Vec& x) { return balance_metric(x); };
  const Vec x0 = {1.0, 0.0, 0.5, 0.0};
  const Trajectory traj = run_gd(p, 0.01, 10, x0, hooks, 5);
  for (const auto& r : traj.records) {
    REQUIRE(r.hessian_trace.has_value());
    REQUIRE(r.balance.has_value());
    CHECK_FALSE(r.test_accuracy.has_value());
  }
  CHECK(traj.records.front().hessian_trace.value() == doctest::Approx(1.25));
  CHECK(traj.records.front().balance.value() == doctest::Approx(0.375));
}

TEST_CASE("a smoothed run tracks plain descent on an easy quadratic") {
  // Matched stepsizes, tiny smoothing: after 200 steps the ensemble-mean
  // two-point loss should sit within a factor of two of the descent loss.
  const QuadraticProblem p = QuadraticProblem::diagonal({1.0, 1.0});
  const double eta = 0.02;
  const long long T = 200;

  RunningStats ratio;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RngStream init(seed, stream_id::kInit);
    const Vec x0 = init.gaussian_vector(2);
    const Trajectory gd = run_gd(p, eta, T, x0, {}, T);
    OptimizerConfig cfg;
    cfg.eta = eta;
    cfg.lambda = 1e-6;
    cfg.T = T;
    cfg.seed = seed;
    cfg.record_every = T;
    const Trajectory zo = run_zo(p, cfg, x0);
    ratio.add(zo.records.back().loss / gd.records.back().loss);
  }
  CHECK(ratio.mean() > 0.5);
  CHECK(ratio.mean() < 2.0);
}
