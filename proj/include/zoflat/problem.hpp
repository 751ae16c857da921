#pragma once

#include <optional>
#include <utility>

#include "zoflat/vec.hpp"

namespace zoflat {

// Loss-function interface shared by estimators, optimizers and diagnostics.
// Implementations must be pure (same x gives the same value) and safe to
// evaluate from concurrent tasks. Capability queries gate the optional
// analytic pieces; calling an unavailable piece throws std::logic_error.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::size_t dim() const = 0;
  virtual double value(const Vec& x) const = 0;

  virtual bool has_gradient() const { return false; }
  virtual Vec gradient(const Vec& x) const;

  virtual bool has_hessian_trace() const { return false; }
  virtual double hessian_trace(const Vec& x) const;

  // Third-derivative surface: the cubic contraction sum_ijk f_ijk u_i u_j u_k
  // and the gradient of tr(Hessian). Present together or not at all.
  virtual bool has_third_derivatives() const { return false; }
  virtual double third_contraction(const Vec& x, const Vec& u) const;
  virtual Vec hessian_trace_gradient(const Vec& x) const;

  virtual bool is_convex() const { return false; }
  virtual std::optional<double> optimum_value() const { return std::nullopt; }
  virtual std::optional<double> min_trace_over_optima() const { return std::nullopt; }

  // Fused evaluation; overridden where value and gradient share work.
  virtual std::pair<double, Vec> value_and_gradient(const Vec& x) const;

 protected:
  void check_dim(const Vec& x, const char* where) const;
};

}  // namespace zoflat
