#include "zoflat/param_select.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace zoflat {

namespace {

// The two selectors below are mirrored, term for term, by the reference
// transcriptions in src/oracle.cpp, and the pair is required to agree bit
// for bit.  Keep every term fully parenthesized, build powers by explicit
// multiplication (never std::pow), and do not re-associate products: only
// commuting the two operands of a single multiplication is guaranteed safe.

double sq(double a) { return a * a; }
double cube(double a) { return (a * a) * a; }
double fourth(double a) { return sq(sq(a)); }

void require_positive(const ParameterInputs& in) {
  const double fields[] = {in.epsilon, in.dim, in.l1, in.l2, in.l3, in.radius};
  for (double v : fields) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("parameter selection requires positive finite inputs");
    }
  }
}

double checked_ceil(double bound) {
  if (!std::isfinite(bound)) {
    throw std::invalid_argument("iteration bound overflows a double");
  }
  return std::ceil(bound);
}

}  // namespace

ParameterPlan select_parameters_main(const ParameterInputs& in) {
  require_positive(in);
  const double e = in.epsilon;
  const double d = in.dim;
  const double d32 = d * std::sqrt(d);

  // Four smoothing branches; the binding one also fixes the iteration bound
  // because the max below collects exactly their reciprocal shapes.
  const double s1 = (std::sqrt(2.0) * in.l1) / (d32 * in.l3);
  const double s2 = (12.0 * std::sqrt(in.l1 * e)) / (in.l3 * sq(d + 10.0));
  const double s3 = (3.0 * e) / ((4.0 * in.l3) * sq(d + 4.0));
  const double s4 = (3.0 * (in.l1 * e)) / ((in.l2 * in.l2) * cube(d + 6.0));

  const double m1 = (d32 * in.l3) / (std::sqrt(2.0) * in.l1);
  const double m2 = (in.l3 * sq(d + 10.0)) / (12.0 * std::sqrt(in.l1 * e));
  const double m3 = ((4.0 * in.l3) * sq(d + 4.0)) / (3.0 * e);
  const double m4 = ((in.l2 * in.l2) * cube(d + 6.0)) / (3.0 * (in.l1 * e));

  const double lead = ((64.0 * ((d + 6.0) * in.l1)) * sq(in.radius)) / e;

  ParameterPlan plan;
  plan.lambda_sq = std::min(std::min(s1, s2), std::min(s3, s4));
  plan.iterations = checked_ceil(lead * std::max(std::max(m1, m2), std::max(m3, m4)));
  plan.eta = 1.0 / ((8.0 * (d + 6.0)) * in.l1);
  return plan;
}

ParameterPlan select_parameters_alt(const ParameterInputs& in) {
  require_positive(in);
  const double e = in.epsilon;
  const double d = in.dim;

  const double s1 = (2.0 * e) / (in.l3 * sq(d + 4.0));
  const double s2 = (2.0 * (in.l1 * e)) / ((in.l2 * in.l2) * fourth(d + 8.0));

  const double m1 = (in.l3 * sq(d + 4.0)) / (2.0 * e);
  const double m2 = ((in.l2 * in.l2) * fourth(d + 8.0)) / (2.0 * (in.l1 * e));

  const double lead = ((48.0 * ((d + 2.0) * in.l1)) * sq(in.radius)) / e;

  ParameterPlan plan;
  plan.lambda_sq = std::min(s1, s2);
  plan.iterations = checked_ceil(lead * std::max(m1, m2));
  plan.eta = 1.0 / ((8.0 * (d + 2.0)) * in.l1);
  return plan;
}

// ---------- asymptotic regimes ----------

AssumptionSet parse_assumption_set(const std::string& text) {
  std::string canon;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    canon.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  if (canon == "L1,L2,L3") return AssumptionSet::kGradHessianThird;
  if (canon == "L1,L2") return AssumptionSet::kGradHessian;
  if (canon == "L0,L2,L3") return AssumptionSet::kValueHessianThird;
  if (canon == "L0,L2") return AssumptionSet::kValueHessian;
  throw std::invalid_argument("unknown assumption set: " + text);
}

RateRegime rate_regime(AssumptionSet set) {
  switch (set) {
    case AssumptionSet::kGradHessianThird:
      return {"eps^(1/2)/d^(3/2)", "1/d", "d^4/eps^2"};
    case AssumptionSet::kGradHessian:
      return {"min{eps^(1/2)/d^2, eps/d^(3/2)}", "1/d", "max{d^5/eps^2, d^4/eps^3}"};
    case AssumptionSet::kValueHessianThird:
      return {"min{eps^(1/2)/d, eps^(1/3)/d^(4/3)}", "lambda/d",
              "max{d^5/eps^2, d^4/eps^(5/2)}"};
    case AssumptionSet::kValueHessian:
      return {"eps/d^(3/2)", "lambda/d", "d^(11/2)/eps^4"};
  }
  throw std::logic_error("unhandled assumption set");
}

}  // namespace zoflat
