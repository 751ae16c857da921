#include "zoflat/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "zoflat/estimators.hpp"

namespace zoflat {

// ---------- Gaussian moment combinatorics ----------

namespace {

// Always pairs the smallest free index first, so every matching is built
// exactly once and arrives in canonical order.
void extend_matchings(std::vector<int>& free_idx, Matching& partial,
                      std::vector<Matching>& out) {
  if (free_idx.empty()) {
    out.push_back(partial);
    return;
  }
  const int first = free_idx.front();
  for (std::size_t j = 1; j < free_idx.size(); ++j) {
    const int mate = free_idx[j];
    std::vector<int> rest;
    rest.reserve(free_idx.size() - 2);
    for (std::size_t k = 1; k < free_idx.size(); ++k) {
      if (k != j) rest.push_back(free_idx[k]);
    }
    partial.emplace_back(first, mate);
    extend_matchings(rest, partial, out);
    partial.pop_back();
  }
}

}  // namespace

PairingSet enumerate_pairings(int n) {
  if (n <= 0 || n % 2 != 0) {
    throw std::invalid_argument("pairings exist only for even positive n");
  }
  if (n > 12) {
    throw std::invalid_argument("pairing enumeration capped at n = 12");
  }
  PairingSet set;
  set.n = n;
  std::vector<int> free_idx(n);
  for (int i = 0; i < n; ++i) free_idx[i] = i;
  Matching partial;
  partial.reserve(n / 2);
  extend_matchings(free_idx, partial, set.pairings);
  return set;
}

double gaussian_moment(const std::vector<int>& labels, int d) {
  if (d <= 0) throw std::invalid_argument("dimension must be positive");
  for (int label : labels) {
    if (label < 0 || label >= d) {
      throw std::invalid_argument("moment label outside [0, d)");
    }
  }
  if (labels.empty()) return 1.0;
  if (labels.size() % 2 != 0) return 0.0;

  const PairingSet set = enumerate_pairings(static_cast<int>(labels.size()));
  double total = 0.0;
  for (const Matching& matching : set.pairings) {
    bool survives = true;
    for (const auto& [a, b] : matching) {
      if (labels[a] != labels[b]) {
        survives = false;
        break;
      }
    }
    if (survives) total += 1.0;
  }
  return total;
}

// ---------- moment-identity verification ----------

CubicProblem random_cubic(std::size_t d, RngStream& rng, double scale) {
  std::vector<double> tensor(d * d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      for (std::size_t k = j; k < d; ++k) {
        const double v = scale * rng.next_gaussian();
        // same double into every permutation keeps the symmetry exact
        const std::size_t idx[3] = {i, j, k};
        std::size_t perm[3] = {0, 1, 2};
        do {
          tensor[(idx[perm[0]] * d + idx[perm[1]]) * d + idx[perm[2]]] = v;
        } while (std::next_permutation(perm, perm + 3));
      }
    }
  }
  std::vector<double> matrix(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      const double v = scale * rng.next_gaussian();
      matrix[i * d + j] = v;
      matrix[j * d + i] = v;
    }
  }
  Vec linear(d);
  for (double& v : linear) v = scale * rng.next_gaussian();
  return CubicProblem(d, std::move(tensor), std::move(matrix), std::move(linear));
}

std::vector<MomentCheck> verify_second_moments(const CubicProblem& p,
                                               const Vec& x, long long n,
                                               RngStream& rng) {
  if (n < 2) throw std::invalid_argument("moment check needs at least 2 samples");

  const double d = static_cast<double>(p.dim());
  const Vec grad = p.gradient(x);
  const Vec trace_grad = p.hessian_trace_gradient(x);

  // |G0|^2 = (g'u)^2 |u|^2, G0'H0 = (g'u) c3 |u|^2, |H0|^2 = c3^2 |u|^2 with
  // c3 the cubic contraction; only these scalars are sampled.
  RunningStats g0_sq, cross, h0_sq;
  Vec u(p.dim());
  for (long long i = 0; i < n; ++i) {
    rng.fill_gaussian(u);
    const double a = dot(grad, u);
    const double c3 = p.third_contraction(x, u);
    const double u_sq = squared_norm(u);
    g0_sq.add(a * a * u_sq);
    cross.add(a * c3 * u_sq);
    h0_sq.add(c3 * c3 * u_sq);
  }

  std::vector<MomentCheck> checks(3);
  checks[0] = {"E|G0|^2", g0_sq.mean(), (d + 2.0) * squared_norm(grad),
               g0_sq.std_error(), n};
  checks[1] = {"E[G0'H0]", cross.mean(), 3.0 * (d + 4.0) * dot(grad, trace_grad),
               cross.std_error(), n};
  checks[2] = {"E|H0|^2", h0_sq.mean(),
               9.0 * (d + 6.0) * squared_norm(trace_grad) +
                   6.0 * (d + 6.0) * p.third_partial_squared_sum(),
               h0_sq.std_error(), n};
  return checks;
}

// ---------- reference transcriptions ----------

namespace {

void reject_nonpositive(const ParameterInputs& in) {
  const double fields[] = {in.epsilon, in.dim, in.l1, in.l2, in.l3, in.radius};
  for (double v : fields) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("parameter selection requires positive finite inputs");
    }
  }
}

double ceil_or_throw(double bound) {
  if (!std::isfinite(bound)) {
    throw std::invalid_argument("iteration bound overflows a double");
  }
  return std::ceil(bound);
}

}  // namespace

ParameterPlan reference_parameters_main(const ParameterInputs& in) {
  reject_nonpositive(in);
  const double eps = in.epsilon;
  const double root_d_cubed = in.dim * std::sqrt(in.dim);
  const double dp4_sq = (in.dim + 4.0) * (in.dim + 4.0);
  const double dp6 = in.dim + 6.0;
  const double dp6_cubed = (dp6 * dp6) * dp6;
  const double dp10_sq = (in.dim + 10.0) * (in.dim + 10.0);
  const double l2_sq = in.l2 * in.l2;

  const double lam_a = (std::sqrt(2.0) * in.l1) / (root_d_cubed * in.l3);
  const double lam_b = (12.0 * std::sqrt(eps * in.l1)) / (in.l3 * dp10_sq);
  const double lam_c = (3.0 * eps) / ((4.0 * in.l3) * dp4_sq);
  const double lam_d = (3.0 * (eps * in.l1)) / (l2_sq * dp6_cubed);

  const double it_a = (root_d_cubed * in.l3) / (std::sqrt(2.0) * in.l1);
  const double it_b = (in.l3 * dp10_sq) / (12.0 * std::sqrt(eps * in.l1));
  const double it_c = ((4.0 * in.l3) * dp4_sq) / (3.0 * eps);
  const double it_d = (l2_sq * dp6_cubed) / (3.0 * (eps * in.l1));

  const double prefactor = ((64.0 * (dp6 * in.l1)) * (in.radius * in.radius)) / eps;

  ParameterPlan plan;
  plan.lambda_sq = std::min({lam_a, lam_b, lam_c, lam_d});
  plan.iterations = ceil_or_throw(prefactor * std::max({it_a, it_b, it_c, it_d}));
  plan.eta = 1.0 / ((8.0 * dp6) * in.l1);
  return plan;
}

ParameterPlan reference_parameters_alt(const ParameterInputs& in) {
  reject_nonpositive(in);
  const double eps = in.epsilon;
  const double dp2 = in.dim + 2.0;
  const double dp4_sq = (in.dim + 4.0) * (in.dim + 4.0);
  const double dp8_sq = (in.dim + 8.0) * (in.dim + 8.0);
  const double dp8_fourth = dp8_sq * dp8_sq;
  const double l2_sq = in.l2 * in.l2;

  const double lam_a = (2.0 * eps) / (in.l3 * dp4_sq);
  const double lam_b = (2.0 * (eps * in.l1)) / (l2_sq * dp8_fourth);

  const double it_a = (in.l3 * dp4_sq) / (2.0 * eps);
  const double it_b = (l2_sq * dp8_fourth) / (2.0 * (eps * in.l1));

  const double prefactor = ((48.0 * (dp2 * in.l1)) * (in.radius * in.radius)) / eps;

  ParameterPlan plan;
  plan.lambda_sq = std::min(lam_a, lam_b);
  plan.iterations = ceil_or_throw(prefactor * std::max(it_a, it_b));
  plan.eta = 1.0 / ((8.0 * dp2) * in.l1);
  return plan;
}

}  // namespace zoflat
