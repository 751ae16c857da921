#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "zoflat/problem.hpp"

namespace zoflat {

// f(y, z) = (y'z - 1)^2 / 2 on R^d x R^d. Every (y, z) with y'z = 1 is a
// global optimum; tr(Hessian) = |y|^2 + |z|^2, minimized over optima at 2
// (forced by y = z, |y| = 1). The balance (|y|^2 - |z|^2)/2 is the quantity
// whose decay separates smoothed zeroth-order steps from plain descent.
class BilinearProblem : public Problem {
 public:
  explicit BilinearProblem(std::size_t d);

  std::size_t dim() const override { return 2 * d_; }
  std::size_t half_dim() const { return d_; }

  double value(const Vec& x) const override;
  bool has_gradient() const override { return true; }
  Vec gradient(const Vec& x) const override;
  bool has_hessian_trace() const override { return true; }
  double hessian_trace(const Vec& x) const override;
  bool has_third_derivatives() const override { return true; }
  double third_contraction(const Vec& x, const Vec& u) const override;
  Vec hessian_trace_gradient(const Vec& x) const override;

  std::optional<double> optimum_value() const override { return 0.0; }
  std::optional<double> min_trace_over_optima() const override { return 2.0; }

 private:
  std::size_t d_;

  // y'z - 1 for the packed layout x = (y; z)
  double residual(const Vec& x) const;
};

// f(x) = x'Ax/2 + c'x + f0 with A symmetric. Third derivatives are all zero,
// so it doubles as the degenerate cubic in oracle tests.
class QuadraticProblem : public Problem {
 public:
  QuadraticProblem(std::vector<double> matrix, Vec linear, double constant = 0.0,
                   bool convex = false,
                   std::optional<double> optimum = std::nullopt);

  // A = diag(eigenvalues), c = 0; convex and optimum = constant when the
  // spectrum is nonnegative.
  static QuadraticProblem diagonal(Vec eigenvalues, double constant = 0.0);

  std::size_t dim() const override { return dim_; }
  double value(const Vec& x) const override;
  bool has_gradient() const override { return true; }
  Vec gradient(const Vec& x) const override;
  bool has_hessian_trace() const override { return true; }
  double hessian_trace(const Vec&) const override { return trace_; }
  bool has_third_derivatives() const override { return true; }
  double third_contraction(const Vec&, const Vec& u) const override;
  Vec hessian_trace_gradient(const Vec& x) const override;
  bool is_convex() const override { return convex_; }
  std::optional<double> optimum_value() const override { return optimum_; }

  Vec matrix_times(const Vec& x) const;

 private:
  std::size_t dim_;
  std::vector<double> a_;  // row-major symmetric
  Vec c_;
  double f0_;
  double trace_;
  bool convex_;
  std::optional<double> optimum_;
};

// f(x) = (1/6) sum_ijk T_ijk x_i x_j x_k + x'Ax/2 + c'x with T symmetric.
// All derivatives are closed-form, which is what the moment-identity oracle
// needs: grad_l = (1/2) sum_jk T_ljk x_j x_k + (Ax)_l + c_l, the Hessian is
// sum_k T_lmk x_k + A_lm, and third partials are the constants T_ijk.
class CubicProblem : public Problem {
 public:
  // tensor is dense row-major d^3; must be symmetric under all index
  // permutations. Dimension is capped at 6: the tensor is dense and every
  // evaluation walks all d^3 entries.
  CubicProblem(std::size_t d, std::vector<double> tensor,
               std::vector<double> matrix, Vec linear);

  std::size_t dim() const override { return d_; }
  double value(const Vec& x) const override;
  bool has_gradient() const override { return true; }
  Vec gradient(const Vec& x) const override;
  bool has_hessian_trace() const override { return true; }
  double hessian_trace(const Vec& x) const override;
  bool has_third_derivatives() const override { return true; }
  double third_contraction(const Vec&, const Vec& u) const override;
  Vec hessian_trace_gradient(const Vec&) const override { return trace_grad_; }

  // sum_ijk T_ijk^2, the constant appearing in the E|H0|^2 identity
  double third_partial_squared_sum() const { return tensor_sq_sum_; }

 private:
  std::size_t d_;
  std::vector<double> t_;  // row-major d^3
  std::vector<double> a_;  // row-major d^2 symmetric
  Vec c_;
  Vec trace_grad_;         // k -> sum_i T_iik
  double a_trace_;
  double tensor_sq_sum_;

  double tensor_at(std::size_t i, std::size_t j, std::size_t k) const {
    return t_[(i * d_ + j) * d_ + k];
  }
};

}  // namespace zoflat
