#include "zoflat/optimizer.hpp"

#include <cmath>
#include <string>

#include "zoflat/estimators.hpp"

namespace zoflat {

namespace {

void append_record(Trajectory& traj, long long iter, double loss, const Vec& x,
                   const DiagnosticsHooks& hooks) {
  if (!std::isfinite(loss) || std::fabs(loss) > kDivergenceLossLimit) {
    traj.final_x = x;
    traj.steps = iter;
    throw DivergenceError("loss " + std::to_string(loss) + " at iteration " +
                              std::to_string(iter) + " left the trusted region",
                          std::move(traj));
  }
  TrajectoryRecord rec;
  rec.iter = iter;
  rec.loss = loss;
  if (hooks.hessian_trace) rec.hessian_trace = hooks.hessian_trace(x);
  if (hooks.balance) rec.balance = hooks.balance(x);
  if (hooks.test_accuracy) rec.test_accuracy = hooks.test_accuracy(x);
  if (hooks.reg_loss) rec.reg_loss = hooks.reg_loss(x);
  traj.records.push_back(std::move(rec));
}

void validate_common(const Problem& p, double eta, long long T,
                     long long record_every, const Vec& x0) {
  if (eta <= 0.0) throw std::invalid_argument("optimizer: eta must be > 0");
  if (T < 1) throw std::invalid_argument("optimizer: T must be >= 1");
  if (record_every < 1) throw std::invalid_argument("optimizer: record_every must be >= 1");
  if (x0.size() != p.dim()) {
    throw std::invalid_argument("optimizer: x0 dimension does not match the problem");
  }
}

}  // namespace

Trajectory run_zo(const Problem& p, const OptimizerConfig& cfg, const Vec& x0,
                  const DiagnosticsHooks& hooks) {
  validate_common(p, cfg.eta, cfg.T, cfg.record_every, x0);
  if (cfg.lambda < 0.0) throw std::invalid_argument("run_zo: lambda must be >= 0");
  if (cfg.lambda == 0.0 && !p.has_gradient()) {
    throw std::invalid_argument("run_zo: lambda = 0 requires a problem with a gradient");
  }

  RngStream rng(cfg.seed, cfg.stream);
  // tau is drawn up front so the selection never depends on trajectory values
  long long tau = -1;
  if (cfg.output_rule == OutputRule::kUniformRandomIterate) {
    tau = static_cast<long long>(rng.next_below(static_cast<std::uint64_t>(cfg.T)));
  }

  Trajectory traj;
  Vec x(x0);
  Vec sum;  // running iterate sum for the average rule
  if (cfg.output_rule == OutputRule::kAverage) sum.assign(x.size(), 0.0);

  append_record(traj, 0, p.value(x), x, hooks);

  Vec u(x.size());
  for (long long t = 0; t < cfg.T; ++t) {
    if (t == tau) {
      traj.selected_x = x;
      traj.selected_iter = t;
    }
    if (cfg.output_rule == OutputRule::kAverage) axpy(1.0, x, sum);

    rng.fill_gaussian(u);
    double coeff = 0.0;
    try {
      coeff = cfg.lambda > 0.0 ? two_point_coeff(p, x, u, cfg.lambda)
                               : directional_limit_coeff(p, x, u);
    } catch (const NumericError& e) {
      traj.final_x = x;
      traj.steps = t;
      throw DivergenceError(std::string(e.what()) + " at iteration " + std::to_string(t),
                            std::move(traj));
    }
    axpy(-cfg.eta * coeff, u, x);

    const long long iter = t + 1;
    if (iter == cfg.T || iter % cfg.record_every == 0) {
      append_record(traj, iter, p.value(x), x, hooks);
    }
  }

  traj.final_x = x;
  traj.steps = cfg.T;
  switch (cfg.output_rule) {
    case OutputRule::kLast:
      traj.selected_x = x;
      traj.selected_iter = cfg.T;
      break;
    case OutputRule::kAverage:
      traj.selected_x = scaled(sum, 1.0 / static_cast<double>(cfg.T));
      traj.selected_iter = -1;
      break;
    case OutputRule::kUniformRandomIterate:
      break;  // captured inside the loop
  }
  return traj;
}

Trajectory run_gd(const Problem& p, double eta, long long T, const Vec& x0,
                  const DiagnosticsHooks& hooks, long long record_every,
                  OutputRule output_rule) {
  validate_common(p, eta, T, record_every, x0);
  if (!p.has_gradient()) throw std::invalid_argument("run_gd: problem has no gradient");
  if (output_rule == OutputRule::kUniformRandomIterate) {
    throw std::invalid_argument("run_gd: uniform-random-iterate needs the stochastic runner");
  }

  Trajectory traj;
  Vec x(x0);
  Vec sum;
  if (output_rule == OutputRule::kAverage) sum.assign(x.size(), 0.0);

  for (long long t = 0; t < T; ++t) {
    auto [loss, grad] = p.value_and_gradient(x);
    if (t == 0 || t % record_every == 0) append_record(traj, t, loss, x, hooks);
    if (!std::isfinite(loss) || std::fabs(loss) > kDivergenceLossLimit) {
      traj.final_x = x;
      traj.steps = t;
      throw DivergenceError("loss " + std::to_string(loss) + " at iteration " +
                                std::to_string(t) + " left the trusted region",
                            std::move(traj));
    }
    if (!all_finite(grad)) {
      traj.final_x = x;
      traj.steps = t;
      throw DivergenceError("non-finite gradient at iteration " + std::to_string(t),
                            std::move(traj));
    }
    if (output_rule == OutputRule::kAverage) axpy(1.0, x, sum);
    axpy(-eta, grad, x);
  }

  append_record(traj, T, p.value(x), x, hooks);
  traj.final_x = x;
  traj.steps = T;
  if (output_rule == OutputRule::kAverage) {
    traj.selected_x = scaled(sum, 1.0 / static_cast<double>(T));
    traj.selected_iter = -1;
  } else {
    traj.selected_x = x;
    traj.selected_iter = T;
  }
  return traj;
}

}  // namespace zoflat
