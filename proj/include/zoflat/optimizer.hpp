#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "zoflat/problem.hpp"
#include "zoflat/rng.hpp"
#include "zoflat/vec.hpp"

namespace zoflat {

enum class OutputRule { kUniformRandomIterate, kLast, kAverage };

struct OptimizerConfig {
  double eta = 0.0;
  double lambda = 0.0;  // 0 switches to directional-limit mode (needs gradient)
  long long T = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;  // run index; keep below stream_id::kInit
  long long record_every = 1;
  OutputRule output_rule = OutputRule::kLast;
};

struct TrajectoryRecord {
  long long iter = 0;
  double loss = 0.0;
  std::optional<double> hessian_trace;
  std::optional<double> balance;
  std::optional<double> test_accuracy;
  std::optional<double> reg_loss;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;  // iters 0, r, 2r, ..., T (last may be partial)
  Vec final_x;
  Vec selected_x;            // per output rule
  long long selected_iter = -1;  // tau for the uniform rule, T for last, -1 for average
  long long steps = 0;
};

// Optional per-record diagnostics; null members leave the column empty.
struct DiagnosticsHooks {
  std::function<double(const Vec&)> hessian_trace;
  std::function<double(const Vec&)> balance;
  std::function<double(const Vec&)> test_accuracy;
  std::function<double(const Vec&)> reg_loss;
};

// Loss left the trusted region (non-finite or > 1e12); carries everything
// recorded up to the failing step so sweeps can keep partial results.
struct DivergenceError : std::runtime_error {
  DivergenceError(const std::string& what, Trajectory so_far)
      : std::runtime_error(what), partial(std::move(so_far)) {}
  Trajectory partial;
};

inline constexpr double kDivergenceLossLimit = 1e12;

// Zeroth-order SGD: T steps of x <- x - eta * coeff * u with one fresh
// Gaussian direction and exactly two function evaluations per step
// (lambda > 0), or the directional-derivative coefficient u'grad f
// (lambda = 0). Records at iteration 0, every record_every steps, and T.
Trajectory run_zo(const Problem& p, const OptimizerConfig& cfg, const Vec& x0,
                  const DiagnosticsHooks& hooks = {});

// Full-batch gradient descent with the same recording scheme. Deterministic,
// so the uniform-random output rule is rejected.
Trajectory run_gd(const Problem& p, double eta, long long T, const Vec& x0,
                  const DiagnosticsHooks& hooks = {}, long long record_every = 1,
                  OutputRule output_rule = OutputRule::kLast);

}  // namespace zoflat
