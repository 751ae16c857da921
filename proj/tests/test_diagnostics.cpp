#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "testing.hpp"
#include "zoflat/diagnostics.hpp"
#include "zoflat/estimators.hpp"
#include "zoflat/optimizer.hpp"
#include "zoflat/oracle.hpp"
#include "zoflat/problems.hpp"
#include "zoflat/rng.hpp"

using namespace zoflat;
using namespace zoflat::testing;

TEST_CASE("regularized loss adds half lambda squared times the trace") {
  const BilinearProblem p(1);
  const Vec x = {1.0, 1.0};  // on the solution manifold, trace 2
  CHECK(regularized_loss(p, x, 0.1) == doctest::Approx(0.01));
  CHECK(regularized_loss(p, x, 0.0) == p.value(x));

  RngStream rng(41, 0);
  const BilinearProblem q(4);
  for (int i = 0; i < 20; ++i) {
    const Vec y = rng.gaussian_vector(8);
    const double lambda = 0.3;
    CHECK(regularized_loss(q, y, lambda) ==
          doctest::Approx(q.value(y) + 0.5 * lambda * lambda * q.hessian_trace(y)));
  }
}

TEST_CASE("regularized loss needs a closed-form trace") {
  struct ValueOnly : Problem {
    std::size_t dim() const override { return 1; }
    double value(const Vec& x) const override { return x[0]; }
  } p;
  CHECK_THROWS_AS(regularized_loss(p, Vec{1.0}, 0.1), std::logic_error);
}

TEST_CASE("flatness report fills exactly the gaps the problem can answer") {
  SUBCASE("bilinear at the flattest optimum") {
    const BilinearProblem p(1);
    const FlatnessReport r = flatness_report(p, Vec{1.0, 1.0}, 0.1);
    CHECK(r.f_value == 0.0);
    CHECK(r.hessian_trace.value() == 2.0);
    CHECK(r.loss_gap.value() == 0.0);
    CHECK(r.trace_gap.value() == 0.0);
    CHECK(r.reg_loss.value() == doctest::Approx(0.01));
  }
  SUBCASE("bilinear at a sharp optimum") {
    const BilinearProblem p(1);
    const FlatnessReport r = flatness_report(p, Vec{2.0, 0.5}, 0.1);
    CHECK(r.loss_gap.value() == 0.0);
    CHECK(r.trace_gap.value() == doctest::Approx(2.25));
  }
  SUBCASE("problem without optimum metadata leaves the gaps empty") {
    struct Plain : Problem {
      std::size_t dim() const override { return 2; }
      double value(const Vec& x) const override { return x[0] * x[0] + x[1]; }
    } p;
    const FlatnessReport r = flatness_report(p, Vec{1.0, 1.0}, 0.2);
    CHECK(r.f_value == 2.0);
    CHECK_FALSE(r.hessian_trace.has_value());
    CHECK_FALSE(r.reg_loss.has_value());
    CHECK_FALSE(r.loss_gap.has_value());
    CHECK_FALSE(r.trace_gap.has_value());
  }
}

TEST_CASE("balance metric hand values and invariances") {
  CHECK(balance_metric(Vec{1.0, 0.0, 0.0, 0.0}) == 0.5);
  CHECK(balance_metric(Vec{3.0, 4.0, 0.0, 5.0}) == 0.0);
  CHECK(balance_metric(Vec{0.0, 0.0, 2.0, 0.0}) == -2.0);
  CHECK_THROWS_AS(balance_metric(Vec{1.0, 2.0, 3.0}), std::invalid_argument);
  CHECK_THROWS_AS(balance_metric(Vec{}), std::invalid_argument);

  // Permuting within each half leaves both norms alone.
  CHECK(balance_metric(Vec{1.0, 2.0, 3.0, 4.0}) ==
        balance_metric(Vec{2.0, 1.0, 4.0, 3.0}));
}

TEST_CASE("descent rescales the balance by exactly one minus (eta r)^2") {
  // One descent step maps (y, z) to (y - eta r z, z - eta r y), so
  // B' = (|y'|^2 - |z'|^2)/2 = B (1 - eta^2 r^2) identically.  The identity
  // holds to roundoff at every step of a real run.
  const BilinearProblem p(10);
  RngStream init(7, stream_id::kInit);
  Vec x = init.gaussian_vector(20);
  const double eta = 0.01;
  for (int t = 0; t < 2000; ++t) {
    const double b = balance_metric(x);
    const double r_sq = 2.0 * p.value(x);  // value = r^2 / 2
    const Vec g = p.gradient(x);
    axpy(-eta, g, x);
    const double want = b * (1.0 - eta * eta * r_sq);
    CHECK(std::abs(balance_metric(x) - want) <=
          1e-12 * std::max(std::abs(b), 1.0));
  }
}

TEST_CASE("single smoothed steps drain the balance at rate two lambda squared") {
  Vec x(50, 0.0);
  x[0] = 2.0;
  x[25] = 1.0;  // B = 1.5

  SUBCASE("positive smoothing") {
    RngStream rng(42, 0);
    const DriftCheck c = balance_decay_test(x, 0.1, 1e-4, 50000, rng);
    CHECK(c.predicted == doctest::Approx(-2.0 * 0.01 * 1.5));
    CHECK(std::abs(c.measured - c.predicted) < mc_tol(c.std_error, 3e-3));
  }
  SUBCASE("the limit estimator leaves the balance alone") {
    RngStream rng(43, 0);
    const DriftCheck c = balance_decay_test(x, 0.0, 1e-4, 50000, rng);
    CHECK(c.predicted == 0.0);
    CHECK(std::abs(c.measured) < mc_tol(c.std_error, 3e-3));
  }
  SUBCASE("balanced points are stationary for the drift") {
    Vec even(4, 1.0);  // B = 0
    RngStream rng(44, 0);
    const DriftCheck c = balance_decay_test(even, 0.2, 1e-4, 20000, rng);
    CHECK(c.predicted == 0.0);
    CHECK(std::abs(c.measured) < mc_tol(c.std_error, 3e-3));
  }
  SUBCASE("ensemble floor is enforced") {
    RngStream rng(45, 0);
    CHECK_THROWS_AS(balance_decay_test(x, 0.1, 1e-4, 999, rng),
                    std::invalid_argument);
  }
}

TEST_CASE("mean smoothed step follows the trace-regularized gradient") {
  SUBCASE("quadratic: prediction is the plain gradient, exactly") {
    const QuadraticProblem p = QuadraticProblem::diagonal({1.0, 2.0});
    const Vec x = {0.3, -0.2};
    RngStream rng(46, 0);
    const VectorDriftCheck c = implicit_drift_test(p, x, 0.1, 1e-4, 20000, rng);
    const Vec g = p.gradient(x);
    for (int k = 0; k < 2; ++k) {
      CHECK(c.predicted[k] == -g[k]);
      CHECK(std::abs(c.measured[k] - c.predicted[k]) <
            mc_tol(c.std_error[k], 1e-3));
    }
  }
  SUBCASE("cubic: the lambda^2 trace-gradient term appears") {
    RngStream coeff_rng(47, 0);
    const CubicProblem p = random_cubic(2, coeff_rng, 0.5);
    const Vec x = {0.4, 0.1};
    const double lambda = 0.3;
    RngStream rng(48, 0);
    const VectorDriftCheck c = implicit_drift_test(p, x, lambda, 1e-4, 100000, rng);
    const Vec g = p.gradient(x);
    const Vec tg = p.hessian_trace_gradient(x);
    for (int k = 0; k < 2; ++k) {
      CHECK(c.predicted[k] ==
            doctest::Approx(-g[k] - 0.5 * lambda * lambda * tg[k]));
      CHECK(std::abs(c.measured[k] - c.predicted[k]) <
            mc_tol(c.std_error[k], 1e-3));
    }
  }
  SUBCASE("problems without third derivatives are refused") {
    struct GradOnly : Problem {
      std::size_t dim() const override { return 1; }
      double value(const Vec& x) const override { return x[0] * x[0]; }
      bool has_gradient() const override { return true; }
      Vec gradient(const Vec& x) const override { return Vec{2.0 * x[0]}; }
    } p;
    RngStream rng(49, 0);
    CHECK_THROWS_AS(implicit_drift_test(p, Vec{1.0}, 0.1, 1e-4, 100, rng),
                    std::logic_error);
  }
}

TEST_CASE("ensemble trace keeps falling between the half and full horizon") {
  // Ten smoothed runs on the balance problem; the mean trace at T must sit
  // a clear margin below the mean trace at T/2 (paired differences).
  const BilinearProblem p(10);
  const double eta = 0.002;
  const double lambda = 0.1;
  const long long T = 20000;

  DiagnosticsHooks hooks;
  hooks.hessian_trace = [&](const Vec& x) { return p.hessian_trace(x); };

  RunningStats diff;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RngStream init(seed, stream_id::kInit);
    const Vec x0 = init.gaussian_vector(20);
    OptimizerConfig cfg;
    cfg.eta = eta;
    cfg.lambda = lambda;
    cfg.T = T;
    cfg.seed = seed;
    cfg.record_every = T / 2;
    const Trajectory traj = run_zo(p, cfg, x0, hooks);
    REQUIRE(traj.records.size() == 3);  // 0, T/2, T
    diff.add(traj.records[1].hessian_trace.value() -
             traj.records[2].hessian_trace.value());
  }
  CHECK(diff.mean() > 0.0);
  CHECK(diff.mean() > 3.0 * diff.std_error());
}
