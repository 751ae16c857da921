#include "zoflat/linear_models.hpp"

#include <cmath>
#include <stdexcept>

namespace zoflat {

namespace {

double sigmoid(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

// log(1 + e^s) without overflow for large |s|
double softplus(double s) {
  if (s > 0.0) return s + std::log1p(std::exp(-s));
  return std::log1p(std::exp(s));
}

}  // namespace

LinearModelProblem::LinearModelProblem(LinearModelKind kind, FeatureMatrix features,
                                       std::vector<double> labels)
    : kind_(kind), features_(std::move(features)), labels_(std::move(labels)) {
  if (features_.n == 0) throw std::invalid_argument("LinearModelProblem: empty dataset");
  if (features_.dim == 0) throw std::invalid_argument("LinearModelProblem: zero feature dim");
  if (labels_.size() != features_.n) {
    throw std::invalid_argument("LinearModelProblem: label count does not match rows");
  }
  for (double b : labels_) {
    const bool ok = kind_ == LinearModelKind::kSvmSquaredHinge
                        ? (b == -1.0 || b == 1.0)
                        : (b == 0.0 || b == 1.0);
    if (!ok) {
      throw std::invalid_argument(
          "LinearModelProblem: label outside the model alphabet (run normalize_labels)");
    }
  }
  row_sq_norms_.resize(features_.n);
  for (std::size_t i = 0; i < features_.n; ++i) {
    const double* row = features_.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < features_.dim; ++j) s += row[j] * row[j];
    row_sq_norms_[i] = s;
  }
}

Vec LinearModelProblem::scores(const Vec& x) const {
  check_dim(x, "LinearModelProblem");
  Vec s(features_.n);
  for (std::size_t i = 0; i < features_.n; ++i) {
    const double* row = features_.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < features_.dim; ++j) acc += row[j] * x[j];
    s[i] = acc;
  }
  return s;
}

double LinearModelProblem::value(const Vec& x) const {
  const Vec s = scores(x);
  const double inv_n = 1.0 / static_cast<double>(features_.n);
  double total = 0.0;
  if (kind_ == LinearModelKind::kSvmSquaredHinge) {
    for (std::size_t i = 0; i < features_.n; ++i) {
      const double slack = 1.0 - labels_[i] * s[i];
      if (slack > 0.0) total += slack * slack;
    }
  } else {
    for (std::size_t i = 0; i < features_.n; ++i) {
      total += softplus(s[i]) - labels_[i] * s[i];
    }
  }
  return total * inv_n;
}

double LinearModelProblem::hessian_trace(const Vec& x) const {
  const Vec s = scores(x);
  const double inv_n = 1.0 / static_cast<double>(features_.n);
  double total = 0.0;
  if (kind_ == LinearModelKind::kSvmSquaredHinge) {
    for (std::size_t i = 0; i < features_.n; ++i) {
      if (labels_[i] * s[i] < 1.0) total += 2.0 * row_sq_norms_[i];
    }
  } else {
    for (std::size_t i = 0; i < features_.n; ++i) {
      const double p = sigmoid(s[i]);
      total += p * (1.0 - p) * row_sq_norms_[i];
    }
  }
  return total * inv_n;
}

LinearModelProblem::Eval LinearModelProblem::eval_all(const Vec& x) const {
  const Vec s = scores(x);
  const double inv_n = 1.0 / static_cast<double>(features_.n);
  Eval out;
  out.grad.assign(features_.dim, 0.0);
  // per-sample weight on phi_i in the gradient sum
  Vec weight(features_.n, 0.0);
  if (kind_ == LinearModelKind::kSvmSquaredHinge) {
    for (std::size_t i = 0; i < features_.n; ++i) {
      const double margin = labels_[i] * s[i];
      if (margin < 1.0) {
        const double slack = 1.0 - margin;
        out.value += slack * slack;
        weight[i] = 2.0 * (margin - 1.0) * labels_[i];
        out.trace += 2.0 * row_sq_norms_[i];
      }
    }
  } else {
    for (std::size_t i = 0; i < features_.n; ++i) {
      const double p = sigmoid(s[i]);
      out.value += softplus(s[i]) - labels_[i] * s[i];
      weight[i] = p - labels_[i];
      out.trace += p * (1.0 - p) * row_sq_norms_[i];
    }
  }
  for (std::size_t i = 0; i < features_.n; ++i) {
    if (weight[i] == 0.0) continue;
    const double* row = features_.row(i);
    for (std::size_t j = 0; j < features_.dim; ++j) {
      out.grad[j] += weight[i] * row[j];
    }
  }
  out.value *= inv_n;
  out.trace *= inv_n;
  scale(out.grad, inv_n);
  return out;
}

Vec LinearModelProblem::gradient(const Vec& x) const { return eval_all(x).grad; }

std::pair<double, Vec> LinearModelProblem::value_and_gradient(const Vec& x) const {
  Eval e = eval_all(x);
  return {e.value, std::move(e.grad)};
}

}  // namespace zoflat
