#pragma once

#include <cstddef>
#include <stdexcept>

#include "zoflat/problem.hpp"
#include "zoflat/rng.hpp"
#include "zoflat/vec.hpp"

namespace zoflat {

// Raised when a function evaluation feeds a non-finite value into an
// estimator; the optimizer turns it into a divergence error.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One estimator draw: the returned vector is exactly coeff * u, so callers
// that only need scalars (drift tests, single-step updates) can skip the
// vector materialization.
struct DirectionSample {
  Vec u;
  double coeff = 0.0;
};

// Welford accumulator; std_error() is sqrt(sample variance / n), 0 for n < 2.
class RunningStats {
 public:
  void add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double std_error() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

// (f(x + lambda u) - f(x - lambda u)) / (2 lambda); exactly two evaluations.
double two_point_coeff(const Problem& p, const Vec& x, const Vec& u, double lambda);
DirectionSample two_point_sample(const Problem& p, const Vec& x, const Vec& u, double lambda);
Vec two_point(const Problem& p, const Vec& x, const Vec& u, double lambda);

// G0(x,u) = (u' grad f(x)) u, the lambda -> 0 limit of the estimator.
double directional_limit_coeff(const Problem& p, const Vec& x, const Vec& u);
Vec directional_limit(const Problem& p, const Vec& x, const Vec& u);

// H0(x,u) = (d^3 f(x)[u]^3) u; E[H0] = 3 grad tr(Hessian).
Vec h0_sample(const Problem& p, const Vec& x, const Vec& u);

// Mean and SE of f(x + lambda u) over n fresh directions; lambda = 0 returns
// (f(x), 0) without sampling.
McEstimate smoothed_loss_mc(const Problem& p, const Vec& x, double lambda,
                            std::size_t n, RngStream& rng);

// (2/delta^2) |mean_n f(x + delta u) - f(x)|, the evaluation-only trace
// surrogate; std_error is the SE of the mean scaled by the same factor.
McEstimate expected_sharpness(const Problem& p, const Vec& x, double delta,
                              std::size_t n, RngStream& rng);

// Mean over n probes of u'[grad f(x + delta u) - grad f(x - delta u)]/(2 delta).
McEstimate hutchinson_trace(const Problem& p, const Vec& x, double delta,
                            std::size_t n, RngStream& rng);

}  // namespace zoflat
