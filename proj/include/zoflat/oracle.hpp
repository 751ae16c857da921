#pragma once

#include <utility>
#include <vector>

#include "zoflat/param_select.hpp"
#include "zoflat/problems.hpp"
#include "zoflat/rng.hpp"
#include "zoflat/vec.hpp"

namespace zoflat {

// ---------- Gaussian moment combinatorics ----------

// A perfect matching on {0,...,n-1}.  Pairs are (small, large) and sorted by
// first element, so equal matchings compare equal.
using Matching = std::vector<std::pair<int, int>>;

struct PairingSet {
  int n = 0;
  std::vector<Matching> pairings;
};

// Complete enumeration of the perfect matchings on {0,...,n-1}; the count is
// (n-1)!! = 1, 3, 15, 105, 945, 10395 for n = 2, 4, ..., 12.  n must be even,
// positive, and at most 12.
PairingSet enumerate_pairings(int n);

// E[prod_j u_{labels[j]}] for u ~ N(0, I_d): the sum over perfect matchings
// of the product of coordinate-equality indicators.  Zero for odd-length
// products, one for the empty product.  Labels are 0-based and must lie in
// [0, d).
double gaussian_moment(const std::vector<int>& labels, int d);

// ---------- moment-identity verification ----------

struct MomentCheck {
  const char* name = "";
  double measured = 0.0;
  double predicted = 0.0;
  double std_error = 0.0;
  long long samples = 0;
};

// Dense cubic with N(0, scale^2) coefficients, exactly symmetric in the
// tensor and matrix parts; the staple input for moment and drift checks.
CubicProblem random_cubic(std::size_t d, RngStream& rng, double scale = 1.0);

// Monte-Carlo check of the three second moments of the directional samplers
//   G0 = (u'grad f(x)) u   and   H0 = (sum_ijk f_ijk u_i u_j u_k) u
// on a cubic problem at x, against the closed forms
//   E|G0|^2   = (d+2) |grad f|^2
//   E[G0'H0]  = 3(d+4) grad f . grad tr
//   E|H0|^2   = 9(d+6) |grad tr|^2 + 6(d+6) sum_ijk f_ijk^2
// where grad tr is the (constant) gradient of tr(hess f).  Needs n >= 2.
std::vector<MomentCheck> verify_second_moments(const CubicProblem& p,
                                               const Vec& x, long long n,
                                               RngStream& rng);

// ---------- reference transcriptions ----------
//
// Re-derived copies of the closed-form schedules in src/param_select.cpp,
// written against the formulas rather than against that file.  The pair must
// agree bit for bit, which pins down the arithmetic: same operation set,
// same association, only commuted multiplications allowed to differ.

ParameterPlan reference_parameters_main(const ParameterInputs& in);
ParameterPlan reference_parameters_alt(const ParameterInputs& in);

}  // namespace zoflat
