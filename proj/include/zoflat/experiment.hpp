#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "zoflat/linear_models.hpp"
#include "zoflat/optimizer.hpp"

namespace zoflat {

// ---------- configuration ----------
//
// Experiments are described by a line-oriented text format (full grammar in
// README.md): `problem`, `optimizer`, and `run` sections closed by `end`,
// one `key value...` pair per line, `#` comments.  Parsing and validation
// errors throw ParseError carrying the 1-based line number.

enum class ProblemKind { kBilinear, kQuadratic, kSvm, kLogistic };

struct SynthSpec {
  long long n_train = 0;
  long long n_test = 0;  // 0 = no held-out split
  int dim = 0;           // ambient dimension before the feature map
  double margin = 1.0;
};

struct ProblemSpec {
  ProblemKind kind = ProblemKind::kBilinear;
  long long dim = 0;                // bilinear packed dimension (even)
  std::vector<double> eigenvalues;  // quadratic diagonal spectrum
  std::string train_path;           // linear models: LIBSVM files ...
  std::string test_path;
  std::optional<SynthSpec> synth;  // ... or generated data
  long long features = 0;          // feature-map output dimension
  std::uint64_t data_seed = 1;     // fixes the data and the feature map
};

enum class OptimizerKind { kGd, kZo, kZoLimit };

struct OptimizerSpec {
  OptimizerKind kind = OptimizerKind::kGd;
  std::string label;  // output-file stem, unique within a config
  double eta = 0.0;
  double lambda = 0.0;  // zo only
};

struct InitSpec {
  enum class Kind { kGaussian, kConstant } kind = Kind::kGaussian;
  // Standard deviation (gaussian) or fill value (constant).  When the config
  // does not set an init, linear models default to gaussian 0.1 and
  // everything else to gaussian 1.
  double value = 1.0;
  bool from_config = false;
};

struct ExperimentConfig {
  ProblemSpec problem;
  std::vector<OptimizerSpec> optimizers;
  long long iterations = 0;
  long long record_every = 1;
  OutputRule output_rule = OutputRule::kLast;
  std::vector<std::uint64_t> seeds;
  InitSpec init;
  std::string out_dir = "out";
};

ExperimentConfig parse_experiment_config(std::istream& in);
ExperimentConfig load_experiment_config(const std::string& path);

// ---------- execution ----------

struct RunOptions {
  std::optional<std::uint64_t> seed_override;  // replaces the seed list
  std::string out_dir_override;                // replaces the configured out-dir
  int jobs = 1;                                // concurrent cells
};

// Final and selected-iterate numbers for one (optimizer, seed) cell.  Empty
// optionals mean the quantity does not exist for the problem, or the cell
// diverged before producing a record.
struct CellResult {
  std::string optimizer;
  std::uint64_t seed = 0;
  bool diverged = false;
  std::string error;  // divergence message, empty on success
  long long steps = 0;
  long long selected_iter = -1;
  std::optional<double> final_loss;
  std::optional<double> final_trace;
  std::optional<double> final_balance;
  std::optional<double> final_test_accuracy;
  std::optional<double> final_reg_loss;
  std::optional<double> selected_loss_gap;
  std::optional<double> selected_trace_gap;
};

struct ExperimentResult {
  std::vector<CellResult> cells;  // config order: optimizer-major, seed-minor
  std::string out_dir;
  int diverged = 0;
};

// Runs every (optimizer, seed) cell, writing <label>_<seed>.csv per cell
// plus summary.csv and report.txt into the output directory.  Cells run
// concurrently up to opts.jobs; outputs are byte-identical regardless of
// the job count.  Divergent cells keep their partial trajectory on disk and
// are flagged rather than failing the whole run.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts);

// Per-record trajectory CSV: iter,loss,trace_hessian,balance,test_accuracy,
// f_reg with absent diagnostics left empty, 17-significant-digit floats, LF
// endings.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

// Fraction of correct predictions: sign(phi'x) against the -1/+1 label
// (SVM; sign(0) counts as +1), or sigmoid(phi'x) thresholded at 1/2 against
// the 0/1 label (logistic).  Throws on an empty split.
double compute_test_accuracy(LinearModelKind kind, const FeatureMatrix& features,
                             const std::vector<double>& labels, const Vec& x);

}  // namespace zoflat
