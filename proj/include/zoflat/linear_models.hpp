#pragma once

#include <vector>

#include "zoflat/data.hpp"
#include "zoflat/problem.hpp"

namespace zoflat {

enum class LinearModelKind { kSvmSquaredHinge, kLogistic };

// Full-batch linear classifier losses over mapped features phi_i:
//   SVM:      (1/N) sum max{0, 1 - b_i phi_i'x}^2,           b_i in {-1,+1}
//   logistic: (1/N) sum -b_i log s_i - (1-b_i) log(1-s_i),   b_i in {0,1},
// with s_i = sigmoid(phi_i'x). Both are convex; gradient and Hessian trace
// have closed forms sharing the per-sample scores, so eval_all computes all
// three in one pass. The squared hinge is C^1 but not C^2 at margin exactly
// 1; the trace uses the inactive-side (zero) contribution there, matching
// the gradient's subgradient choice.
class LinearModelProblem : public Problem {
 public:
  LinearModelProblem(LinearModelKind kind, FeatureMatrix features,
                     std::vector<double> labels);

  std::size_t dim() const override { return features_.dim; }
  std::size_t sample_count() const { return features_.n; }
  LinearModelKind kind() const { return kind_; }

  double value(const Vec& x) const override;
  bool has_gradient() const override { return true; }
  Vec gradient(const Vec& x) const override;
  bool has_hessian_trace() const override { return true; }
  double hessian_trace(const Vec& x) const override;
  bool is_convex() const override { return true; }
  std::pair<double, Vec> value_and_gradient(const Vec& x) const override;

  struct Eval {
    double value = 0.0;
    Vec grad;
    double trace = 0.0;
  };
  Eval eval_all(const Vec& x) const;

 private:
  LinearModelKind kind_;
  FeatureMatrix features_;
  std::vector<double> labels_;
  Vec row_sq_norms_;

  Vec scores(const Vec& x) const;  // phi_i'x for every row
};

}  // namespace zoflat
