#include "zoflat/estimators.hpp"

#include <cmath>

namespace zoflat {

double RunningStats::std_error() const {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

namespace {

Vec shifted(const Vec& x, double step, const Vec& u) {
  Vec out(x);
  axpy(step, u, out);
  return out;
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw NumericError(std::string(what) + " produced a non-finite value");
  }
}

}  // namespace

double two_point_coeff(const Problem& p, const Vec& x, const Vec& u, double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("two_point: lambda must be > 0");
  check_same_dim(x, u, "two_point");
  const double fp = p.value(shifted(x, lambda, u));
  const double fm = p.value(shifted(x, -lambda, u));
  require_finite(fp, "two_point forward evaluation");
  require_finite(fm, "two_point backward evaluation");
  return (fp - fm) / (2.0 * lambda);
}

DirectionSample two_point_sample(const Problem& p, const Vec& x, const Vec& u,
                                 double lambda) {
  return DirectionSample{u, two_point_coeff(p, x, u, lambda)};
}

Vec two_point(const Problem& p, const Vec& x, const Vec& u, double lambda) {
  return scaled(u, two_point_coeff(p, x, u, lambda));
}

double directional_limit_coeff(const Problem& p, const Vec& x, const Vec& u) {
  if (!p.has_gradient()) {
    throw std::logic_error("directional_limit: problem does not expose a gradient");
  }
  check_same_dim(x, u, "directional_limit");
  return dot(u, p.gradient(x));
}

Vec directional_limit(const Problem& p, const Vec& x, const Vec& u) {
  return scaled(u, directional_limit_coeff(p, x, u));
}

Vec h0_sample(const Problem& p, const Vec& x, const Vec& u) {
  if (!p.has_third_derivatives()) {
    throw std::logic_error("h0_sample: problem does not expose third derivatives");
  }
  check_same_dim(x, u, "h0_sample");
  return scaled(u, p.third_contraction(x, u));
}

McEstimate smoothed_loss_mc(const Problem& p, const Vec& x, double lambda,
                            std::size_t n, RngStream& rng) {
  if (lambda < 0.0) throw std::invalid_argument("smoothed_loss_mc: lambda must be >= 0");
  if (lambda == 0.0) return {p.value(x), 0.0, n};
  if (n < 2) throw std::invalid_argument("smoothed_loss_mc: n must be >= 2");
  RunningStats stats;
  Vec u(x.size());
  for (std::size_t i = 0; i < n; ++i) {
    rng.fill_gaussian(u);
    stats.add(p.value(shifted(x, lambda, u)));
  }
  return {stats.mean(), stats.std_error(), n};
}

McEstimate expected_sharpness(const Problem& p, const Vec& x, double delta,
                              std::size_t n, RngStream& rng) {
  if (delta <= 0.0) throw std::invalid_argument("expected_sharpness: delta must be > 0");
  if (n < 1) throw std::invalid_argument("expected_sharpness: n must be >= 1");
  const double fx = p.value(x);
  RunningStats stats;
  Vec u(x.size());
  for (std::size_t i = 0; i < n; ++i) {
    rng.fill_gaussian(u);
    stats.add(p.value(shifted(x, delta, u)));
  }
  const double factor = 2.0 / (delta * delta);
  return {factor * std::fabs(stats.mean() - fx), factor * stats.std_error(), n};
}

McEstimate hutchinson_trace(const Problem& p, const Vec& x, double delta,
                            std::size_t n, RngStream& rng) {
  if (!p.has_gradient()) {
    throw std::logic_error("hutchinson_trace: problem does not expose a gradient");
  }
  if (delta <= 0.0) throw std::invalid_argument("hutchinson_trace: delta must be > 0");
  if (n < 1) throw std::invalid_argument("hutchinson_trace: n must be >= 1");
  RunningStats stats;
  Vec u(x.size());
  for (std::size_t i = 0; i < n; ++i) {
    rng.fill_gaussian(u);
    const Vec gp = p.gradient(shifted(x, delta, u));
    const Vec gm = p.gradient(shifted(x, -delta, u));
    double probe = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) probe += u[j] * (gp[j] - gm[j]);
    stats.add(probe / (2.0 * delta));
  }
  return {stats.mean(), stats.std_error(), n};
}

}  // namespace zoflat
