#include "zoflat/problems.hpp"

#include <stdexcept>
#include <string>

#include "zoflat/problem.hpp"

namespace zoflat {

// ---------- Problem defaults ----------

Vec Problem::gradient(const Vec&) const {
  throw std::logic_error("problem does not expose a gradient");
}

double Problem::hessian_trace(const Vec&) const {
  throw std::logic_error("problem does not expose a Hessian trace");
}

double Problem::third_contraction(const Vec&, const Vec&) const {
  throw std::logic_error("problem does not expose third derivatives");
}

Vec Problem::hessian_trace_gradient(const Vec&) const {
  throw std::logic_error("problem does not expose third derivatives");
}

std::pair<double, Vec> Problem::value_and_gradient(const Vec& x) const {
  return {value(x), gradient(x)};
}

void Problem::check_dim(const Vec& x, const char* where) const {
  if (x.size() != dim()) {
    throw std::invalid_argument(std::string(where) + ": expected dimension " +
                                std::to_string(dim()) + ", got " +
                                std::to_string(x.size()));
  }
}

// ---------- BilinearProblem ----------

BilinearProblem::BilinearProblem(std::size_t d) : d_(d) {
  if (d == 0) throw std::invalid_argument("BilinearProblem: d must be >= 1");
}

double BilinearProblem::residual(const Vec& x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < d_; ++i) s += x[i] * x[d_ + i];
  return s - 1.0;
}

double BilinearProblem::value(const Vec& x) const {
  check_dim(x, "BilinearProblem::value");
  const double r = residual(x);
  return 0.5 * r * r;
}

Vec BilinearProblem::gradient(const Vec& x) const {
  check_dim(x, "BilinearProblem::gradient");
  const double r = residual(x);
  Vec g(2 * d_);
  for (std::size_t i = 0; i < d_; ++i) {
    g[i] = r * x[d_ + i];
    g[d_ + i] = r * x[i];
  }
  return g;
}

double BilinearProblem::hessian_trace(const Vec& x) const {
  check_dim(x, "BilinearProblem::hessian_trace");
  return squared_norm(x);
}

double BilinearProblem::third_contraction(const Vec& x, const Vec& u) const {
  check_dim(x, "BilinearProblem::third_contraction");
  check_dim(u, "BilinearProblem::third_contraction");
  // With u = (v; w): d^3/dt^3 [ (y+tv)'(z+tw) - 1 ]^2 / 2 = 6 (y'w + z'v) v'w.
  double s = 0.0;  // y'w + z'v
  double q = 0.0;  // v'w
  for (std::size_t i = 0; i < d_; ++i) {
    s += x[i] * u[d_ + i] + x[d_ + i] * u[i];
    q += u[i] * u[d_ + i];
  }
  return 6.0 * s * q;
}

Vec BilinearProblem::hessian_trace_gradient(const Vec& x) const {
  check_dim(x, "BilinearProblem::hessian_trace_gradient");
  return scaled(x, 2.0);
}

// ---------- QuadraticProblem ----------

QuadraticProblem::QuadraticProblem(std::vector<double> matrix, Vec linear,
                                   double constant, bool convex,
                                   std::optional<double> optimum)
    : dim_(linear.size()),
      a_(std::move(matrix)),
      c_(std::move(linear)),
      f0_(constant),
      convex_(convex),
      optimum_(optimum) {
  if (dim_ == 0) throw std::invalid_argument("QuadraticProblem: dimension must be >= 1");
  if (a_.size() != dim_ * dim_) {
    throw std::invalid_argument("QuadraticProblem: matrix size does not match dimension");
  }
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = i + 1; j < dim_; ++j) {
      if (a_[i * dim_ + j] != a_[j * dim_ + i]) {
        throw std::invalid_argument("QuadraticProblem: matrix must be symmetric");
      }
    }
  }
  trace_ = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) trace_ += a_[i * dim_ + i];
}

QuadraticProblem QuadraticProblem::diagonal(Vec eigenvalues, double constant) {
  const std::size_t d = eigenvalues.size();
  std::vector<double> a(d * d, 0.0);
  bool psd = true;
  for (std::size_t i = 0; i < d; ++i) {
    a[i * d + i] = eigenvalues[i];
    if (eigenvalues[i] < 0.0) psd = false;
  }
  std::optional<double> optimum;
  if (psd) optimum = constant;
  return QuadraticProblem(std::move(a), Vec(d, 0.0), constant, psd, optimum);
}

Vec QuadraticProblem::matrix_times(const Vec& x) const {
  Vec out(dim_, 0.0);
  for (std::size_t i = 0; i < dim_; ++i) {
    double s = 0.0;
    const double* row = a_.data() + i * dim_;
    for (std::size_t j = 0; j < dim_; ++j) s += row[j] * x[j];
    out[i] = s;
  }
  return out;
}

double QuadraticProblem::value(const Vec& x) const {
  check_dim(x, "QuadraticProblem::value");
  const Vec ax = matrix_times(x);
  return 0.5 * dot(x, ax) + dot(c_, x) + f0_;
}

Vec QuadraticProblem::gradient(const Vec& x) const {
  check_dim(x, "QuadraticProblem::gradient");
  Vec g = matrix_times(x);
  axpy(1.0, c_, g);
  return g;
}

double QuadraticProblem::third_contraction(const Vec&, const Vec& u) const {
  if (u.size() != dim_) {
    throw std::invalid_argument("QuadraticProblem::third_contraction: dimension mismatch");
  }
  return 0.0;
}

Vec QuadraticProblem::hessian_trace_gradient(const Vec& x) const {
  check_dim(x, "QuadraticProblem::hessian_trace_gradient");
  return Vec(dim_, 0.0);
}

// ---------- CubicProblem ----------

CubicProblem::CubicProblem(std::size_t d, std::vector<double> tensor,
                           std::vector<double> matrix, Vec linear)
    : d_(d), t_(std::move(tensor)), a_(std::move(matrix)), c_(std::move(linear)) {
  if (d_ == 0 || d_ > 6) {
    throw std::invalid_argument("CubicProblem: dimension must be in [1, 6]");
  }
  if (t_.size() != d_ * d_ * d_ || a_.size() != d_ * d_ || c_.size() != d_) {
    throw std::invalid_argument("CubicProblem: coefficient sizes do not match dimension");
  }
  for (std::size_t i = 0; i < d_; ++i) {
    for (std::size_t j = 0; j < d_; ++j) {
      if (a_[i * d_ + j] != a_[j * d_ + i]) {
        throw std::invalid_argument("CubicProblem: quadratic part must be symmetric");
      }
      for (std::size_t k = 0; k < d_; ++k) {
        const double v = tensor_at(i, j, k);
        if (v != tensor_at(i, k, j) || v != tensor_at(j, i, k) ||
            v != tensor_at(k, j, i)) {
          throw std::invalid_argument("CubicProblem: tensor must be symmetric");
        }
      }
    }
  }
  trace_grad_.assign(d_, 0.0);
  for (std::size_t k = 0; k < d_; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < d_; ++i) s += tensor_at(i, i, k);
    trace_grad_[k] = s;
  }
  a_trace_ = 0.0;
  for (std::size_t i = 0; i < d_; ++i) a_trace_ += a_[i * d_ + i];
  tensor_sq_sum_ = 0.0;
  for (double v : t_) tensor_sq_sum_ += v * v;
}

double CubicProblem::value(const Vec& x) const {
  check_dim(x, "CubicProblem::value");
  double cubic = 0.0;
  for (std::size_t i = 0; i < d_; ++i) {
    for (std::size_t j = 0; j < d_; ++j) {
      for (std::size_t k = 0; k < d_; ++k) {
        cubic += tensor_at(i, j, k) * x[i] * x[j] * x[k];
      }
    }
  }
  double quad = 0.0;
  for (std::size_t i = 0; i < d_; ++i) {
    for (std::size_t j = 0; j < d_; ++j) quad += a_[i * d_ + j] * x[i] * x[j];
  }
  return cubic / 6.0 + 0.5 * quad + dot(c_, x);
}

Vec CubicProblem::gradient(const Vec& x) const {
  check_dim(x, "CubicProblem::gradient");
  Vec g(d_, 0.0);
  for (std::size_t l = 0; l < d_; ++l) {
    double cubic = 0.0;
    for (std::size_t j = 0; j < d_; ++j) {
      for (std::size_t k = 0; k < d_; ++k) {
        cubic += tensor_at(l, j, k) * x[j] * x[k];
      }
    }
    double quad = 0.0;
    for (std::size_t j = 0; j < d_; ++j) quad += a_[l * d_ + j] * x[j];
    g[l] = 0.5 * cubic + quad + c_[l];
  }
  return g;
}

double CubicProblem::hessian_trace(const Vec& x) const {
  check_dim(x, "CubicProblem::hessian_trace");
  return dot(trace_grad_, x) + a_trace_;
}

double CubicProblem::third_contraction(const Vec&, const Vec& u) const {
  if (u.size() != d_) {
    throw std::invalid_argument("CubicProblem::third_contraction: dimension mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < d_; ++i) {
    for (std::size_t j = 0; j < d_; ++j) {
      for (std::size_t k = 0; k < d_; ++k) {
        s += tensor_at(i, j, k) * u[i] * u[j] * u[k];
      }
    }
  }
  return s;
}

}  // namespace zoflat
