#pragma once

#include <string>

namespace zoflat {

// ---------- closed-form schedules ----------
//
// Closed-form (smoothing, iteration-count, stepsize) schedules for driving
// the two-point optimizer to an approximate flat minimum of a convex
// objective with known smoothness constants.  Two routes are provided: the
// uniformly-sampled-iterate route (select_parameters_main) and the
// averaged-iterate route (select_parameters_alt).  All constants are
// user-supplied; nothing is estimated from data.

struct ParameterInputs {
  double epsilon = 0.0;  // target excess trace at the returned iterate
  double dim = 0.0;      // ambient dimension (enters the formulas as a real)
  double l1 = 0.0;       // Lipschitz constant of the gradient
  double l2 = 0.0;       // Lipschitz constant of the Hessian
  double l3 = 0.0;       // Lipschitz constant of the third derivative
  double radius = 0.0;   // distance from the initialization to a minimizer
};

struct ParameterPlan {
  // Squared smoothing radius; take the square root before configuring a run.
  double lambda_sq = 0.0;
  // Smallest admissible iteration count.  Kept as an integer-valued double
  // because the bound can exceed what fits in a 64-bit integer.
  double iterations = 0.0;
  double eta = 0.0;  // stepsize
};

// Both selectors require every input to be positive and finite and throw
// std::invalid_argument otherwise, or when the iteration bound overflows.
ParameterPlan select_parameters_main(const ParameterInputs& in);
ParameterPlan select_parameters_alt(const ParameterInputs& in);

// ---------- asymptotic regimes ----------
//
// Which smoothness constants are assumed to exist determines how fast the
// schedule can be pushed; each supported set maps to the asymptotic orders
// of (smoothing, stepsize, iterations) in the target accuracy eps and the
// dimension d.

enum class AssumptionSet {
  kGradHessianThird,   // L1, L2, L3 finite
  kGradHessian,        // L1, L2 finite
  kValueHessianThird,  // L0, L2, L3 finite (value Lipschitz, no L1)
  kValueHessian,       // L0, L2 finite
};

// Parses a comma-separated constant list such as "L1,L2,L3" or "L0,L2"
// (case-insensitive, whitespace ignored); unknown sets throw
// std::invalid_argument.
AssumptionSet parse_assumption_set(const std::string& text);

struct RateRegime {
  std::string lambda_order;     // smoothing radius order in (eps, d)
  std::string eta_order;        // stepsize order
  std::string iteration_order;  // iteration-count order
};

RateRegime rate_regime(AssumptionSet set);

}  // namespace zoflat
