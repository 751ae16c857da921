#pragma once

#include <optional>

#include "zoflat/problem.hpp"
#include "zoflat/rng.hpp"
#include "zoflat/vec.hpp"

namespace zoflat {

// ---------- flatness quantities ----------

// f(x) + (lambda^2/2) * tr(hess f(x)); requires a closed-form trace.
double regularized_loss(const Problem& p, const Vec& x, double lambda);

// Snapshot of how close x is to a flat optimum.  Gaps that depend on
// constants the problem does not expose stay empty rather than being
// guessed.
struct FlatnessReport {
  double lambda = 0.0;
  double f_value = 0.0;
  std::optional<double> hessian_trace;  // absent without a closed-form trace
  std::optional<double> reg_loss;       // f + (lambda^2/2) * trace
  std::optional<double> loss_gap;       // f(x) - min f, needs optimum_value
  std::optional<double> trace_gap;      // trace - min trace over optima
};

FlatnessReport flatness_report(const Problem& p, const Vec& x, double lambda);

// (||y||^2 - ||z||^2)/2 for x packed as (y; z); throws std::invalid_argument
// on odd dimension.
double balance_metric(const Vec& x);

// ---------- single-step drift ensembles ----------
//
// Both checks condition on a fixed x and average m independent single
// optimizer steps, so the standard errors are clean and no O(eta) trajectory
// bias accumulates.

struct DriftCheck {
  double measured = 0.0;  // MC mean of (metric after - metric before)/eta
  double predicted = 0.0;
  double std_error = 0.0;
  long long samples = 0;
};

// Single two-point steps (directional-limit steps when lambda == 0) on the
// inner-product objective of dimension x.size(), compared against the
// predicted balance drift -2 lambda^2 B(x).  Requires m >= 1000 so the
// standard error means something; eta should be small (<= 1e-3) because the
// prediction drops O(eta) terms.
DriftCheck balance_decay_test(const Vec& x, double lambda, double eta,
                              long long m, RngStream& rng);

struct VectorDriftCheck {
  Vec measured;   // per-coordinate MC mean of (x_after - x)/eta
  Vec predicted;  // -grad f(x) - (lambda^2/2) * grad tr(hess f(x))
  Vec std_error;
  long long samples = 0;
};

// Per-coordinate mean step direction against the second-order prediction;
// requires a closed-form gradient and trace gradient.
VectorDriftCheck implicit_drift_test(const Problem& p, const Vec& x,
                                     double lambda, double eta, long long m,
                                     RngStream& rng);

}  // namespace zoflat
