#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "zoflat/data.hpp"
#include "zoflat/diagnostics.hpp"
#include "zoflat/experiment.hpp"
#include "zoflat/oracle.hpp"
#include "zoflat/param_select.hpp"
#include "zoflat/problems.hpp"
#include "zoflat/rng.hpp"

namespace {

using namespace zoflat;

// ---------- verification suites ----------
//
// Each check is one row: measured against predicted with an explicit
// tolerance (exact checks use tolerance 0).  The suites wrap the library's
// oracle/diagnostics operations so a user can re-run them without the test
// harness.

struct CheckRow {
  std::string name;
  double measured = 0.0;
  double predicted = 0.0;
  double std_error = 0.0;
  double tolerance = 0.0;  // |measured - predicted| must not exceed this
};

bool row_passes(const CheckRow& row) {
  return std::fabs(row.measured - row.predicted) <= row.tolerance;
}

int report_rows(const std::vector<CheckRow>& rows, bool csv) {
  int failures = 0;
  if (csv) {
    std::printf("check,measured,predicted,std_error,tolerance,pass\n");
  }
  for (const CheckRow& row : rows) {
    const bool ok = row_passes(row);
    if (!ok) ++failures;
    if (csv) {
      std::printf("%s,%s,%s,%s,%s,%d\n", row.name.c_str(),
                  format_double(row.measured).c_str(),
                  format_double(row.predicted).c_str(),
                  format_double(row.std_error).c_str(),
                  format_double(row.tolerance).c_str(), ok ? 1 : 0);
    } else {
      std::printf("%-34s measured %-14.6g predicted %-14.6g se %-12.4g %s\n",
                  row.name.c_str(), row.measured, row.predicted, row.std_error,
                  ok ? "pass" : "FAIL");
    }
  }
  if (!csv) {
    std::printf("%zu checks, %d failure%s\n", rows.size(), failures,
                failures == 1 ? "" : "s");
  }
  return failures == 0 ? 0 : 1;
}

// MC tolerance: three standard errors with a tiny absolute floor so exact
// zeros do not fail on representation noise.
double mc_tol(double se, double floor_abs = 1e-12) {
  return std::max(3.0 * se, floor_abs);
}

std::vector<CheckRow> suite_isserlis() {
  std::vector<CheckRow> rows;
  const int counts[][2] = {{2, 1}, {4, 3}, {6, 15}, {8, 105}, {10, 945}};
  for (const auto& [n, expect] : counts) {
    const PairingSet set = enumerate_pairings(n);
    rows.push_back({"pairings(n=" + std::to_string(n) + ")",
                    static_cast<double>(set.pairings.size()),
                    static_cast<double>(expect), 0.0, 0.0});
  }
  rows.push_back({"E[u1^4]", gaussian_moment({0, 0, 0, 0}, 2), 3.0, 0.0, 0.0});
  rows.push_back({"E[u1^2 u2^2]", gaussian_moment({0, 0, 1, 1}, 2), 1.0, 0.0, 0.0});
  rows.push_back({"E[u1 u2]", gaussian_moment({0, 1}, 2), 0.0, 0.0, 0.0});
  rows.push_back({"E[u1^8]", gaussian_moment({0, 0, 0, 0, 0, 0, 0, 0}, 1), 105.0,
                  0.0, 0.0});
  return rows;
}

std::vector<CheckRow> suite_moments() {
  std::vector<CheckRow> rows;
  RngStream coeff_rng(7, stream_id::kVerify);
  const CubicProblem cubic = random_cubic(3, coeff_rng, 0.5);
  const Vec x = {0.4, -0.3, 0.2};
  RngStream mc_rng(8, stream_id::kVerify + 1);
  for (const MomentCheck& check : verify_second_moments(cubic, x, 200000, mc_rng)) {
    rows.push_back({check.name, check.measured, check.predicted, check.std_error,
                    mc_tol(check.std_error)});
  }

  // d = 1 anchor: f = x^3/6 has a single third partial equal to 1, so
  // E|H0|^2 = 9*7 + 6*7 = 105, which is also E[u^8] on the nose.
  const CubicProblem anchor(1, {1.0}, {0.0}, {0.0});
  const double predicted =
      9.0 * 7.0 * squared_norm(anchor.hessian_trace_gradient({0.0})) +
      6.0 * 7.0 * anchor.third_partial_squared_sum();
  rows.push_back({"E|H0|^2 anchor vs E[u^8]", predicted,
                  gaussian_moment({0, 0, 0, 0, 0, 0, 0, 0}, 1), 0.0, 0.0});
  return rows;
}

std::vector<CheckRow> suite_drift() {
  std::vector<CheckRow> rows;
  const auto add_vector_check = [&rows](const std::string& prefix,
                                        const VectorDriftCheck& check) {
    for (std::size_t k = 0; k < check.measured.size(); ++k) {
      rows.push_back({prefix + "[" + std::to_string(k) + "]", check.measured[k],
                      check.predicted[k], check.std_error[k],
                      mc_tol(check.std_error[k])});
    }
  };

  // zero third derivatives: the step is unbiased for -grad f
  const QuadraticProblem quad = QuadraticProblem::diagonal({1.0, 2.0});
  RngStream quad_rng(11, stream_id::kVerify + 2);
  add_vector_check("quadratic drift",
                   implicit_drift_test(quad, {0.3, -0.2}, 0.1, 1e-3, 50000, quad_rng));

  // f = x^3/6: drift picks up the -(lambda^2/2) * grad tr(hess) correction
  const CubicProblem cubic(1, {1.0}, {0.0}, {0.0});
  RngStream cubic_rng(12, stream_id::kVerify + 3);
  add_vector_check("cubic drift",
                   implicit_drift_test(cubic, {0.7}, 0.3, 1e-3, 200000, cubic_rng));

  RngStream limit_rng(13, stream_id::kVerify + 4);
  add_vector_check("cubic drift (limit)",
                   implicit_drift_test(cubic, {0.7}, 0.0, 1e-3, 200000, limit_rng));
  return rows;
}

std::vector<CheckRow> suite_balance() {
  std::vector<CheckRow> rows;
  // y = 2 e1, z = e1 in dimension 2x25, so the balance starts at 1.5
  Vec x(50, 0.0);
  x[0] = 2.0;
  x[25] = 1.0;

  RngStream rng_a(21, stream_id::kVerify + 5);
  const DriftCheck smoothed = balance_decay_test(x, 0.1, 1e-4, 50000, rng_a);
  rows.push_back({"balance drift (lambda=0.1)", smoothed.measured, smoothed.predicted,
                  smoothed.std_error, std::max(3.0 * smoothed.std_error, 0.003)});

  RngStream rng_b(22, stream_id::kVerify + 6);
  const DriftCheck limit = balance_decay_test(x, 0.0, 1e-4, 50000, rng_b);
  rows.push_back({"balance drift (limit)", limit.measured, limit.predicted,
                  limit.std_error, mc_tol(limit.std_error)});

  RngStream rng_c(23, stream_id::kVerify + 7);
  Vec balanced(50, 0.0);
  balanced[0] = 1.0;
  balanced[25] = 1.0;
  const DriftCheck fixed_point = balance_decay_test(balanced, 0.1, 1e-4, 50000, rng_c);
  rows.push_back({"balance drift (B=0)", fixed_point.measured, fixed_point.predicted,
                  fixed_point.std_error, mc_tol(fixed_point.std_error)});
  return rows;
}

std::vector<CheckRow> suite_params() {
  std::vector<CheckRow> rows;
  RngStream rng(2024, stream_id::kVerify + 8);
  const auto log_uniform = [&rng](double lo_exp, double hi_exp) {
    return std::pow(10.0, lo_exp + (hi_exp - lo_exp) * rng.next_unit());
  };

  int main_matches = 0;
  int alt_matches = 0;
  for (int i = 0; i < 100; ++i) {
    ParameterInputs in;
    in.epsilon = log_uniform(-6.0, 0.0);
    in.dim = static_cast<double>(2 + static_cast<int>(rng.next_below(999)));
    in.l1 = log_uniform(-3.0, 3.0);
    in.l2 = log_uniform(-3.0, 3.0);
    in.l3 = log_uniform(-3.0, 3.0);
    in.radius = log_uniform(-2.0, 2.0);

    const ParameterPlan a = select_parameters_main(in);
    const ParameterPlan b = reference_parameters_main(in);
    if (a.lambda_sq == b.lambda_sq && a.iterations == b.iterations && a.eta == b.eta) {
      ++main_matches;
    }
    const ParameterPlan c = select_parameters_alt(in);
    const ParameterPlan d = reference_parameters_alt(in);
    if (c.lambda_sq == d.lambda_sq && c.iterations == d.iterations && c.eta == d.eta) {
      ++alt_matches;
    }
  }
  rows.push_back({"dual agreement (main, 100 inputs)", static_cast<double>(main_matches),
                  100.0, 0.0, 0.0});
  rows.push_back({"dual agreement (alt, 100 inputs)", static_cast<double>(alt_matches),
                  100.0, 0.0, 0.0});

  ParameterInputs spot;
  spot.epsilon = spot.l1 = spot.l2 = spot.l3 = spot.radius = 1.0;
  spot.dim = 4.0;
  rows.push_back({"eta(main, d=4, L1=1)", select_parameters_main(spot).eta, 1.0 / 80.0,
                  0.0, 0.0});
  spot.dim = 6.0;
  rows.push_back({"eta(alt, d=6, L1=1)", select_parameters_alt(spot).eta, 1.0 / 64.0,
                  0.0, 0.0});
  return rows;
}

int cmd_verify(const std::string& suite, bool csv) {
  std::vector<CheckRow> rows;
  if (suite == "isserlis") {
    rows = suite_isserlis();
  } else if (suite == "moments") {
    rows = suite_moments();
  } else if (suite == "drift") {
    rows = suite_drift();
  } else if (suite == "balance") {
    rows = suite_balance();
  } else if (suite == "params") {
    rows = suite_params();
  } else {
    std::fprintf(stderr,
                 "error: unknown suite '%s' (moments, isserlis, drift, balance, "
                 "params)\n",
                 suite.c_str());
    return 2;
  }
  return report_rows(rows, csv);
}

// ---------- run ----------

int cmd_run(const std::string& config_path, const RunOptions& opts) {
  const ExperimentConfig cfg = load_experiment_config(config_path);
  const ExperimentResult result = run_experiment(cfg, opts);
  std::printf("wrote %zu cell file%s + summary.csv + report.txt to %s\n",
              result.cells.size(), result.cells.size() == 1 ? "" : "s",
              result.out_dir.c_str());
  if (result.diverged > 0) {
    for (const CellResult& cell : result.cells) {
      if (cell.diverged) {
        std::fprintf(stderr, "diverged: %s seed %llu: %s\n", cell.optimizer.c_str(),
                     static_cast<unsigned long long>(cell.seed), cell.error.c_str());
      }
    }
    return 3;
  }
  return 0;
}

// ---------- parse-libsvm ----------

int cmd_parse_libsvm(const std::string& path, bool stats, bool emit) {
  const Dataset ds = parse_libsvm_file(path);
  if (emit) {
    // canonical re-serialization only, so the output is pipeable
    std::fputs(serialize_libsvm(ds).c_str(), stdout);
    return 0;
  }
  std::printf("rows: %zu\n", ds.n());
  std::printf("max index: %d\n", ds.max_index + 1);  // 1-based, as in the files
  std::map<double, std::size_t> histogram;
  for (double label : ds.labels) ++histogram[label];
  std::printf("labels:\n");
  for (const auto& [label, count] : histogram) {
    std::printf("  %s: %zu\n", format_double(label).c_str(), count);
  }
  if (stats) {
    std::size_t nnz = 0;
    for (const SparseRow& row : ds.rows) nnz += row.entries.size();
    std::printf("nonzeros: %zu\n", nnz);
    std::printf("mean nonzeros per row: %s\n",
                format_double(ds.n() == 0
                                  ? 0.0
                                  : static_cast<double>(nnz) /
                                        static_cast<double>(ds.n()))
                    .c_str());
  }
  return 0;
}

// ---------- param-select ----------

int cmd_param_select(const ParameterInputs& in, const std::string& variant,
                     const std::string& assumptions) {
  const ParameterPlan plan =
      variant == "alt" ? select_parameters_alt(in) : select_parameters_main(in);
  std::printf("variant:    %s\n", variant.c_str());
  std::printf("lambda_sq:  %s\n", format_double(plan.lambda_sq).c_str());
  std::printf("lambda:     %s\n", format_double(std::sqrt(plan.lambda_sq)).c_str());
  std::printf("iterations: %s\n", format_double(plan.iterations).c_str());
  std::printf("eta:        %s\n", format_double(plan.eta).c_str());
  if (!assumptions.empty()) {
    const RateRegime regime = rate_regime(parse_assumption_set(assumptions));
    std::printf("regime lambda: %s\n", regime.lambda_order.c_str());
    std::printf("regime eta:    %s\n", regime.eta_order.c_str());
    std::printf("regime T:      %s\n", regime.iteration_order.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zeroth-order optimization toolkit"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "execute an experiment config");
  std::string config_path;
  run->add_option("config", config_path, "experiment config file")->required();
  std::uint64_t seed_override = 0;
  auto* seed_opt = run->add_option("--seed-override", seed_override,
                                   "run a single seed instead of the config list");
  RunOptions opts;
  run->add_option("--out-dir", opts.out_dir_override,
                  "write outputs here instead of the config out-dir");
  run->add_option("--jobs", opts.jobs, "concurrent cells")
      ->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify", "run a named verification suite");
  std::string suite;
  verify->add_option("suite", suite, "moments|isserlis|drift|balance|params")
      ->required();
  bool csv = false;
  verify->add_flag("--csv", csv, "machine-readable output");

  auto* parse = app.add_subcommand("parse-libsvm", "parse and summarize a data file");
  std::string data_path;
  parse->add_option("path", data_path, "LIBSVM-format file")->required();
  bool stats = false;
  parse->add_flag("--stats", stats, "extra sparsity statistics");
  bool emit = false;
  parse->add_flag("--emit", emit, "print the canonical re-serialization");

  auto* select = app.add_subcommand("param-select", "closed-form schedule calculator");
  ParameterInputs inputs;
  select->add_option("--epsilon", inputs.epsilon, "target excess trace")->required();
  select->add_option("--dim", inputs.dim, "ambient dimension")->required();
  select->add_option("--l1", inputs.l1, "gradient Lipschitz constant")->required();
  select->add_option("--l2", inputs.l2, "Hessian Lipschitz constant")->required();
  select->add_option("--l3", inputs.l3, "third-derivative Lipschitz constant")
      ->required();
  select->add_option("--radius", inputs.radius, "initial distance to a minimizer")
      ->required();
  std::string variant = "main";
  select->add_option("--variant", variant, "main (sampled iterate) or alt (averaged)")
      ->check(CLI::IsMember({"main", "alt"}));
  std::string assumptions;
  select->add_option("--assumptions", assumptions,
                     "smoothness set (e.g. L1,L2,L3) to print asymptotic orders");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (seed_opt->count() > 0) opts.seed_override = seed_override;
      return cmd_run(config_path, opts);
    }
    if (verify->parsed()) return cmd_verify(suite, csv);
    if (parse->parsed()) return cmd_parse_libsvm(data_path, stats, emit);
    if (select->parsed()) return cmd_param_select(inputs, variant, assumptions);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
