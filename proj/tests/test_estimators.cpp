#include <cmath>
#include <limits>
#include <stdexcept>

#include "doctest.h"
#include "testing.hpp"
#include "zoflat/estimators.hpp"
#include "zoflat/oracle.hpp"
#include "zoflat/problems.hpp"
#include "zoflat/rng.hpp"

using namespace zoflat;
using namespace zoflat::testing;

TEST_CASE("running stats on a hand-checked sample") {
  RunningStats s;
  for (const double v : {1.0, 2.0, 3.0, 4.0}) s.add(v);
  CHECK(s.count() == 4);
  CHECK(s.mean() == doctest::Approx(2.5));
  CHECK(s.variance() == doctest::Approx(5.0 / 3.0));
  CHECK(s.std_error() == doctest::Approx(std::sqrt(5.0 / 12.0)));

  RunningStats one;
  one.add(7.0);
  CHECK(one.variance() == 0.0);
  CHECK(one.std_error() == 0.0);
}

TEST_CASE("two-point coefficient uses exactly two evaluations") {
  const BilinearProblem inner(2);
  const CountingProblem p(inner);
  RngStream rng(11, 0);
  const Vec x = rng.gaussian_vector(4);
  const Vec u = rng.gaussian_vector(4);
  two_point_coeff(p, x, u, 0.1);
  CHECK(p.value_calls == 2);
  two_point(p, x, u, 0.1);
  CHECK(p.value_calls == 4);
}

TEST_CASE("two-point coefficient is exact on polynomial problems") {
  RngStream rng(12, 0);

  SUBCASE("linear: the difference quotient collapses to c'u") {
    const LinearObjective p(Vec{1.5, -2.0, 0.25});
    const Vec x = rng.gaussian_vector(3);
    const Vec u = rng.gaussian_vector(3);
    for (const double lambda : {1e-4, 0.1, 2.0}) {
      CHECK(rel_err(two_point_coeff(p, x, u, lambda), dot(p.gradient(x), u)) < 1e-12);
    }
  }

  SUBCASE("quadratic: even terms cancel, leaving g'u") {
    const QuadraticProblem p({2.0, 0.5, 0.5, 1.0}, Vec{0.3, -0.1});
    const Vec x = rng.gaussian_vector(2);
    const Vec u = rng.gaussian_vector(2);
    const double want = dot(p.gradient(x), u);
    CHECK(rel_err(two_point_coeff(p, x, u, 0.5), want) < 1e-12);
  }

  SUBCASE("cubic: the smoothing bias is exactly (lambda^2/6) d3f[u]^3") {
    RngStream coeff_rng(13, 0);
    const CubicProblem p = random_cubic(4, coeff_rng);
    const Vec x = rng.gaussian_vector(4);
    const Vec u = rng.gaussian_vector(4);
    for (const double lambda : {0.05, 0.3, 1.0}) {
      const double want = dot(p.gradient(x), u) +
                          (lambda * lambda / 6.0) * p.third_contraction(x, u);
      CHECK(rel_err(two_point_coeff(p, x, u, lambda), want) < 1e-10);
    }
  }
}

TEST_CASE("two-point estimator returns coeff times the direction") {
  const BilinearProblem p(3);
  RngStream rng(14, 0);
  const Vec x = rng.gaussian_vector(6);
  const Vec u = rng.gaussian_vector(6);
  const DirectionSample s = two_point_sample(p, x, u, 0.2);
  const Vec g = two_point(p, x, u, 0.2);
  for (int i = 0; i < 6; ++i) CHECK(g[i] == s.coeff * u[i]);
}

TEST_CASE("two-point rejects non-positive smoothing") {
  const BilinearProblem p(1);
  const Vec x = {1.0, 1.0};
  const Vec u = {0.5, -0.5};
  CHECK_THROWS_AS(two_point_coeff(p, x, u, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(two_point_coeff(p, x, u, -0.1), std::invalid_argument);
}

TEST_CASE("non-finite evaluations surface as numeric errors") {
  struct Exploding : Problem {
    std::size_t dim() const override { return 1; }
    double value(const Vec& x) const override {
      return x[0] > 1.0 ? std::numeric_limits<double>::infinity() : x[0];
    }
  } p;
  const Vec x = {1.0};
  const Vec u = {1.0};
  CHECK_THROWS_AS(two_point_coeff(p, x, u, 0.5), NumericError);
}

TEST_CASE("directional limit matches the gradient projection") {
  const BilinearProblem p(2);
  RngStream rng(15, 0);
  const Vec x = rng.gaussian_vector(4);
  const Vec u = rng.gaussian_vector(4);
  CHECK(directional_limit_coeff(p, x, u) == dot(p.gradient(x), u));
  const Vec g = directional_limit(p, x, u);
  for (int i = 0; i < 4; ++i) CHECK(g[i] == dot(p.gradient(x), u) * u[i]);
}

TEST_CASE("third-order sample averages to three times the trace gradient") {
  RngStream coeff_rng(16, 0);
  const CubicProblem p = random_cubic(3, coeff_rng, 0.6);
  RngStream rng(17, 0);
  const Vec x = rng.gaussian_vector(3);
  const Vec tg = p.hessian_trace_gradient(x);

  RunningStats per_coord[3];
  const long long n = 200000;
  for (long long i = 0; i < n; ++i) {
    const Vec u = rng.gaussian_vector(3);
    const Vec h = h0_sample(p, x, u);
    for (int k = 0; k < 3; ++k) per_coord[k].add(h[k]);
  }
  for (int k = 0; k < 3; ++k) {
    CHECK(std::abs(per_coord[k].mean() - 3.0 * tg[k]) <
          mc_tol(per_coord[k].std_error()));
  }
}

TEST_CASE("smoothed loss equals value plus half lambda squared trace") {
  SUBCASE("exact in expectation for quadratics") {
    const QuadraticProblem p = QuadraticProblem::diagonal({1.0, 4.0, 0.5});
    const Vec x = {0.2, -1.0, 0.7};
    RngStream rng(18, 0);
    const double lambda = 0.3;
    const McEstimate est = smoothed_loss_mc(p, x, lambda, 100000, rng);
    const double want = p.value(x) + 0.5 * lambda * lambda * p.hessian_trace(x);
    CHECK(std::abs(est.mean - want) < mc_tol(est.std_error));
  }
  SUBCASE("exact in expectation for cubics: odd terms average out") {
    RngStream coeff_rng(19, 0);
    const CubicProblem p = random_cubic(2, coeff_rng, 0.5);
    const Vec x = {0.4, -0.6};
    RngStream rng(20, 0);
    const double lambda = 0.25;
    const McEstimate est = smoothed_loss_mc(p, x, lambda, 200000, rng);
    const double want = p.value(x) + 0.5 * lambda * lambda * p.hessian_trace(x);
    CHECK(std::abs(est.mean - want) < mc_tol(est.std_error));
  }
  SUBCASE("lambda zero short-circuits to the plain value") {
    const BilinearProblem p(2);
    const Vec x = {1.0, 0.0, 1.0, 0.0};
    RngStream rng(21, 0);
    const McEstimate est = smoothed_loss_mc(p, x, 0.0, 10, rng);
    CHECK(est.mean == p.value(x));
    CHECK(est.std_error == 0.0);
  }
  SUBCASE("sample floor is enforced") {
    const BilinearProblem p(1);
    RngStream rng(22, 0);
    CHECK_THROWS_AS(smoothed_loss_mc(p, Vec{1.0, 1.0}, 0.1, 1, rng),
                    std::invalid_argument);
  }
}

TEST_CASE("expected sharpness recovers the trace for quadratics") {
  const QuadraticProblem p = QuadraticProblem::diagonal({2.0, 1.0, 3.0, 0.5});
  const Vec x = {0.1, 0.2, -0.3, 0.4};
  RngStream rng(23, 0);
  const McEstimate est = expected_sharpness(p, x, 0.05, 50000, rng);
  CHECK(std::abs(est.mean - 6.5) < mc_tol(est.std_error, 1e-9));
}

TEST_CASE("expected sharpness vanishes on flat objectives") {
  const LinearObjective p(Vec{1.0, -2.0});
  const Vec x = {0.3, 0.4};
  RngStream rng(24, 0);
  const McEstimate est = expected_sharpness(p, x, 1.0, 20000, rng);
  CHECK(std::abs(est.mean) < mc_tol(est.std_error, 1e-9));
}

TEST_CASE("probe-based trace estimate concentrates on the true trace") {
  SUBCASE("identity quadratic gives the dimension exactly per sample") {
    const QuadraticProblem p = QuadraticProblem::diagonal(Vec(7, 1.0));
    RngStream rng(25, 0);
    const McEstimate est = hutchinson_trace(p, Vec(7, 0.0), 1e-3, 20000, rng);
    CHECK(std::abs(est.mean - 7.0) < mc_tol(est.std_error));
  }
  SUBCASE("bilinear at a random point, small probe bias") {
    const BilinearProblem p(5);
    RngStream rng(26, 0);
    const Vec x = rng.gaussian_vector(10);
    const McEstimate est = hutchinson_trace(p, x, 1e-3, 50000, rng);
    CHECK(std::abs(est.mean - p.hessian_trace(x)) < mc_tol(est.std_error, 1e-6));
  }
}

TEST_CASE("second moments of an estimator step obey the smoothing bound") {
  // E|g_lambda|^2 <= 2(d+6)|grad F|^2 + (L2^2/3) lambda^4 (d+6)^4 for
  // objectives with constant third derivatives; the Frobenius norm of the
  // third-derivative tensor is a valid Hessian-Lipschitz constant.
  RngStream coeff_rng(27, 0);
  const CubicProblem p = random_cubic(3, coeff_rng, 0.4);
  RngStream rng(28, 0);
  const Vec x = rng.gaussian_vector(3);
  const double d = 3.0;
  const double lambda = 0.2;

  Vec grad_f = p.gradient(x);
  const Vec tg = p.hessian_trace_gradient(x);
  Vec grad_big_f = grad_f;
  axpy(0.5 * lambda * lambda, tg, grad_big_f);

  RunningStats sq;
  const long long n = 200000;
  for (long long i = 0; i < n; ++i) {
    const Vec u = rng.gaussian_vector(3);
    const double c = two_point_coeff(p, x, u, lambda);
    sq.add(c * c * squared_norm(u));
  }
  const double l2 = std::sqrt(p.third_partial_squared_sum());
  const double bound = 2.0 * (d + 6.0) * squared_norm(grad_big_f) +
                       (l2 * l2 / 3.0) * std::pow(lambda, 4) * std::pow(d + 6.0, 4);
  CHECK(sq.mean() - 3.0 * sq.std_error() <= bound);

  // And the known exact value for the lambda -> 0 limit: (d+2)|grad f|^2.
  RunningStats lim;
  for (long long i = 0; i < n; ++i) {
    const Vec u = rng.gaussian_vector(3);
    const double c = directional_limit_coeff(p, x, u);
    lim.add(c * c * squared_norm(u));
  }
  CHECK(std::abs(lim.mean() - (d + 2.0) * squared_norm(grad_f)) <
        mc_tol(lim.std_error()));
}
