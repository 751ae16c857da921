#include "zoflat/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "zoflat/data.hpp"
#include "zoflat/diagnostics.hpp"
#include "zoflat/estimators.hpp"
#include "zoflat/problems.hpp"
#include "zoflat/rng.hpp"

namespace zoflat {

// ---------- config parsing ----------

namespace {

constexpr long long kMaxIterations = 100000000;  // 1e8
constexpr double kMaxEta = 10.0;
constexpr double kMaxLambda = 10.0;
constexpr long long kMaxProblemDim = 1000000;

struct Line {
  int number = 0;
  std::vector<std::string> tokens;
};

// Comment-stripped, whitespace-tokenized lines; blank lines dropped but line
// numbers preserved for error positions.
std::vector<Line> read_lines(std::istream& in) {
  std::vector<Line> lines;
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    Line line;
    line.number = number;
    std::string current;
    for (char c : raw) {
      if (c == '#') break;
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!current.empty()) {
          line.tokens.push_back(current);
          current.clear();
        }
      } else {
        current.push_back(c);
      }
    }
    if (!current.empty()) line.tokens.push_back(current);
    if (!line.tokens.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

double parse_real(const std::string& tok, int line, const std::string& what) {
  if (!tok.empty()) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() + tok.size() && std::isfinite(v)) return v;
  }
  throw ParseError(line, what + " expects a finite number, got '" + tok + "'");
}

long long parse_int(const std::string& tok, int line, const std::string& what) {
  if (!tok.empty()) {
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(tok.c_str(), &end, 10);
    if (end == tok.c_str() + tok.size() && errno == 0) return v;
  }
  throw ParseError(line, what + " expects an integer, got '" + tok + "'");
}

std::uint64_t parse_u64(const std::string& tok, int line, const std::string& what) {
  if (!tok.empty() && tok[0] != '-') {
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(tok.c_str(), &end, 10);
    if (end == tok.c_str() + tok.size() && errno == 0) return v;
  }
  throw ParseError(line, what + " expects a nonnegative integer, got '" + tok + "'");
}

std::string default_label(const OptimizerSpec& opt) {
  switch (opt.kind) {
    case OptimizerKind::kGd:
      return "gd";
    case OptimizerKind::kZoLimit:
      return "zo_limit";
    case OptimizerKind::kZo: {
      char buf[48];
      std::snprintf(buf, sizeof buf, "zo_l%g", opt.lambda);
      return buf;
    }
  }
  return "opt";
}

// Consumes lines [i+1, ...) until `end`; returns the index just past it.
std::size_t parse_problem_section(const std::vector<Line>& lines, std::size_t i,
                                  ProblemSpec& spec) {
  const Line& head = lines[i];
  if (head.tokens.size() != 2) {
    throw ParseError(head.number, "problem section needs exactly one kind");
  }
  const std::string& kind = head.tokens[1];
  if (kind == "bilinear") {
    spec.kind = ProblemKind::kBilinear;
  } else if (kind == "quadratic") {
    spec.kind = ProblemKind::kQuadratic;
  } else if (kind == "svm") {
    spec.kind = ProblemKind::kSvm;
  } else if (kind == "logistic") {
    spec.kind = ProblemKind::kLogistic;
  } else {
    throw ParseError(head.number, "unknown problem kind '" + kind +
                                      "' (bilinear, quadratic, svm, logistic)");
  }
  const bool linear_model =
      spec.kind == ProblemKind::kSvm || spec.kind == ProblemKind::kLogistic;

  long long synth_test = 0;
  int synth_test_line = 0;
  for (std::size_t j = i + 1; j < lines.size(); ++j) {
    const Line& line = lines[j];
    const auto& t = line.tokens;
    if (t[0] == "end") {
      if (t.size() != 1) throw ParseError(line.number, "'end' takes no arguments");
      // section-level consistency
      switch (spec.kind) {
        case ProblemKind::kBilinear:
          if (spec.dim == 0) throw ParseError(line.number, "bilinear problem needs 'dim'");
          break;
        case ProblemKind::kQuadratic:
          if (spec.eigenvalues.empty()) {
            throw ParseError(line.number, "quadratic problem needs 'eigenvalues'");
          }
          break;
        case ProblemKind::kSvm:
        case ProblemKind::kLogistic:
          if (spec.synth.has_value() == !spec.train_path.empty()) {
            throw ParseError(line.number,
                             "linear-model problem needs exactly one of 'synth' or 'train'");
          }
          if (spec.features <= 0) {
            throw ParseError(line.number, "linear-model problem needs 'features'");
          }
          if (synth_test > 0 && !spec.synth) {
            throw ParseError(synth_test_line, "'synth-test' requires 'synth'");
          }
          if (!spec.test_path.empty() && spec.train_path.empty()) {
            throw ParseError(line.number, "'test' requires 'train'");
          }
          if (spec.synth) spec.synth->n_test = synth_test;
          break;
      }
      return j + 1;
    }

    if (t[0] == "dim") {
      if (spec.kind != ProblemKind::kBilinear) {
        throw ParseError(line.number, "'dim' only applies to the bilinear problem");
      }
      if (t.size() != 2) throw ParseError(line.number, "'dim' takes one value");
      spec.dim = parse_int(t[1], line.number, "'dim'");
      if (spec.dim < 2 || spec.dim % 2 != 0 || spec.dim > kMaxProblemDim) {
        throw ParseError(line.number, "'dim' must be even, >= 2, and <= 1000000");
      }
    } else if (t[0] == "eigenvalues") {
      if (spec.kind != ProblemKind::kQuadratic) {
        throw ParseError(line.number, "'eigenvalues' only applies to the quadratic problem");
      }
      if (t.size() < 2) throw ParseError(line.number, "'eigenvalues' needs at least one value");
      spec.eigenvalues.clear();
      for (std::size_t k = 1; k < t.size(); ++k) {
        spec.eigenvalues.push_back(parse_real(t[k], line.number, "'eigenvalues'"));
      }
    } else if (t[0] == "synth") {
      if (!linear_model) {
        throw ParseError(line.number, "'synth' only applies to svm/logistic problems");
      }
      if (t.size() != 4) throw ParseError(line.number, "'synth' takes n, dim, margin");
      SynthSpec synth;
      synth.n_train = parse_int(t[1], line.number, "'synth' n");
      synth.dim = static_cast<int>(parse_int(t[2], line.number, "'synth' dim"));
      synth.margin = parse_real(t[3], line.number, "'synth' margin");
      if (synth.n_train < 2) throw ParseError(line.number, "'synth' needs n >= 2");
      if (synth.dim < 1 || synth.dim > kMaxProblemDim) {
        throw ParseError(line.number, "'synth' dim out of range");
      }
      if (synth.margin < 0.0) throw ParseError(line.number, "'synth' margin must be >= 0");
      spec.synth = synth;
    } else if (t[0] == "synth-test") {
      if (!linear_model) {
        throw ParseError(line.number, "'synth-test' only applies to svm/logistic problems");
      }
      if (t.size() != 2) throw ParseError(line.number, "'synth-test' takes one count");
      synth_test = parse_int(t[1], line.number, "'synth-test'");
      synth_test_line = line.number;
      if (synth_test < 1) throw ParseError(line.number, "'synth-test' needs n >= 1");
    } else if (t[0] == "train" || t[0] == "test") {
      if (!linear_model) {
        throw ParseError(line.number, "'" + t[0] + "' only applies to svm/logistic problems");
      }
      if (t.size() != 2) throw ParseError(line.number, "'" + t[0] + "' takes one path");
      (t[0] == "train" ? spec.train_path : spec.test_path) = t[1];
    } else if (t[0] == "features") {
      if (!linear_model) {
        throw ParseError(line.number, "'features' only applies to svm/logistic problems");
      }
      if (t.size() != 2) throw ParseError(line.number, "'features' takes one dimension");
      spec.features = parse_int(t[1], line.number, "'features'");
      if (spec.features < 1 || spec.features > kMaxProblemDim) {
        throw ParseError(line.number, "'features' out of range");
      }
    } else if (t[0] == "data-seed") {
      if (t.size() != 2) throw ParseError(line.number, "'data-seed' takes one value");
      spec.data_seed = parse_u64(t[1], line.number, "'data-seed'");
    } else {
      throw ParseError(line.number, "unknown problem key '" + t[0] + "'");
    }
  }
  throw ParseError(lines.back().number, "problem section never closed with 'end'");
}

std::size_t parse_optimizer_section(const std::vector<Line>& lines, std::size_t i,
                                    OptimizerSpec& spec) {
  const Line& head = lines[i];
  if (head.tokens.size() != 2) {
    throw ParseError(head.number, "optimizer section needs exactly one kind");
  }
  const std::string& kind = head.tokens[1];
  if (kind == "gd") {
    spec.kind = OptimizerKind::kGd;
  } else if (kind == "zo") {
    spec.kind = OptimizerKind::kZo;
  } else if (kind == "zo-limit") {
    spec.kind = OptimizerKind::kZoLimit;
  } else {
    throw ParseError(head.number,
                     "unknown optimizer kind '" + kind + "' (gd, zo, zo-limit)");
  }

  bool saw_eta = false;
  bool saw_lambda = false;
  for (std::size_t j = i + 1; j < lines.size(); ++j) {
    const Line& line = lines[j];
    const auto& t = line.tokens;
    if (t[0] == "end") {
      if (t.size() != 1) throw ParseError(line.number, "'end' takes no arguments");
      if (!saw_eta) throw ParseError(line.number, "optimizer needs 'eta'");
      if (spec.kind == OptimizerKind::kZo && !saw_lambda) {
        throw ParseError(line.number, "zo optimizer needs 'lambda'");
      }
      if (spec.label.empty()) spec.label = default_label(spec);
      return j + 1;
    }
    if (t[0] == "eta") {
      if (t.size() != 2) throw ParseError(line.number, "'eta' takes one value");
      spec.eta = parse_real(t[1], line.number, "'eta'");
      if (!(spec.eta > 0.0) || spec.eta > kMaxEta) {
        throw ParseError(line.number, "'eta' must lie in (0, 10]");
      }
      saw_eta = true;
    } else if (t[0] == "lambda") {
      if (spec.kind != OptimizerKind::kZo) {
        throw ParseError(line.number, "'lambda' only applies to zo optimizers");
      }
      if (t.size() != 2) throw ParseError(line.number, "'lambda' takes one value");
      spec.lambda = parse_real(t[1], line.number, "'lambda'");
      if (spec.lambda < 0.0 || spec.lambda > kMaxLambda) {
        throw ParseError(line.number, "'lambda' must lie in [0, 10]");
      }
      saw_lambda = true;
    } else if (t[0] == "label") {
      if (t.size() != 2) throw ParseError(line.number, "'label' takes one token");
      spec.label = t[1];
    } else {
      throw ParseError(line.number, "unknown optimizer key '" + t[0] + "'");
    }
  }
  throw ParseError(lines.back().number, "optimizer section never closed with 'end'");
}

std::size_t parse_run_section(const std::vector<Line>& lines, std::size_t i,
                              ExperimentConfig& cfg, bool& saw_iterations) {
  if (lines[i].tokens.size() != 1) {
    throw ParseError(lines[i].number, "run section takes no arguments");
  }
  for (std::size_t j = i + 1; j < lines.size(); ++j) {
    const Line& line = lines[j];
    const auto& t = line.tokens;
    if (t[0] == "end") {
      if (t.size() != 1) throw ParseError(line.number, "'end' takes no arguments");
      if (!saw_iterations) throw ParseError(line.number, "run section needs 'iterations'");
      if (cfg.seeds.empty()) throw ParseError(line.number, "run section needs 'seeds'");
      return j + 1;
    }
    if (t[0] == "iterations") {
      if (t.size() != 2) throw ParseError(line.number, "'iterations' takes one value");
      cfg.iterations = parse_int(t[1], line.number, "'iterations'");
      if (cfg.iterations < 1 || cfg.iterations > kMaxIterations) {
        throw ParseError(line.number, "'iterations' must lie in [1, 100000000]");
      }
      saw_iterations = true;
    } else if (t[0] == "record-every") {
      if (t.size() != 2) throw ParseError(line.number, "'record-every' takes one value");
      cfg.record_every = parse_int(t[1], line.number, "'record-every'");
      if (cfg.record_every < 1) {
        throw ParseError(line.number, "'record-every' must be >= 1");
      }
    } else if (t[0] == "seeds") {
      if (t.size() < 2) throw ParseError(line.number, "'seeds' needs at least one value");
      cfg.seeds.clear();
      for (std::size_t k = 1; k < t.size(); ++k) {
        const std::uint64_t seed = parse_u64(t[k], line.number, "'seeds'");
        if (std::find(cfg.seeds.begin(), cfg.seeds.end(), seed) != cfg.seeds.end()) {
          throw ParseError(line.number,
                           "duplicate seed " + t[k] + " would overwrite its own outputs");
        }
        cfg.seeds.push_back(seed);
      }
    } else if (t[0] == "init") {
      if (t.size() != 3) {
        throw ParseError(line.number, "'init' takes a kind (gaussian|constant) and a value");
      }
      if (t[1] == "gaussian") {
        cfg.init.kind = InitSpec::Kind::kGaussian;
        cfg.init.value = parse_real(t[2], line.number, "'init gaussian'");
        if (!(cfg.init.value > 0.0)) {
          throw ParseError(line.number, "'init gaussian' needs a positive deviation");
        }
      } else if (t[1] == "constant") {
        cfg.init.kind = InitSpec::Kind::kConstant;
        cfg.init.value = parse_real(t[2], line.number, "'init constant'");
      } else {
        throw ParseError(line.number, "unknown init kind '" + t[1] + "'");
      }
      cfg.init.from_config = true;
    } else if (t[0] == "out-dir") {
      if (t.size() != 2) throw ParseError(line.number, "'out-dir' takes one path");
      cfg.out_dir = t[1];
    } else if (t[0] == "output-rule") {
      if (t.size() != 2) throw ParseError(line.number, "'output-rule' takes one value");
      if (t[1] == "last") {
        cfg.output_rule = OutputRule::kLast;
      } else if (t[1] == "average") {
        cfg.output_rule = OutputRule::kAverage;
      } else if (t[1] == "uniform") {
        cfg.output_rule = OutputRule::kUniformRandomIterate;
      } else {
        throw ParseError(line.number,
                         "unknown output rule '" + t[1] + "' (last, average, uniform)");
      }
    } else {
      throw ParseError(line.number, "unknown run key '" + t[0] + "'");
    }
  }
  throw ParseError(lines.back().number, "run section never closed with 'end'");
}

}  // namespace

ExperimentConfig parse_experiment_config(std::istream& in) {
  const std::vector<Line> lines = read_lines(in);
  if (lines.empty()) throw ParseError(1, "empty config");

  ExperimentConfig cfg;
  bool have_problem = false;
  bool have_run = false;
  bool saw_iterations = false;
  int problem_line = 0;

  std::size_t i = 0;
  while (i < lines.size()) {
    const Line& head = lines[i];
    const std::string& section = head.tokens[0];
    if (section == "problem") {
      if (have_problem) throw ParseError(head.number, "duplicate problem section");
      problem_line = head.number;
      i = parse_problem_section(lines, i, cfg.problem);
      have_problem = true;
    } else if (section == "optimizer") {
      OptimizerSpec spec;
      i = parse_optimizer_section(lines, i, spec);
      for (const OptimizerSpec& other : cfg.optimizers) {
        if (other.label == spec.label) {
          throw ParseError(head.number, "duplicate optimizer label '" + spec.label + "'");
        }
      }
      cfg.optimizers.push_back(std::move(spec));
    } else if (section == "run") {
      if (have_run) throw ParseError(head.number, "duplicate run section");
      i = parse_run_section(lines, i, cfg, saw_iterations);
      have_run = true;
    } else {
      throw ParseError(head.number,
                       "expected 'problem', 'optimizer', or 'run', got '" + section + "'");
    }
  }

  const int last = lines.back().number;
  if (!have_problem) throw ParseError(last, "config needs a problem section");
  if (cfg.optimizers.empty()) throw ParseError(last, "config needs at least one optimizer");
  if (!have_run) throw ParseError(last, "config needs a run section");

  if (cfg.output_rule == OutputRule::kUniformRandomIterate) {
    for (const OptimizerSpec& opt : cfg.optimizers) {
      if (opt.kind == OptimizerKind::kGd) {
        throw ParseError(last, "the uniform output rule applies only to zo optimizers");
      }
    }
  }

  for (const std::string& path : {cfg.problem.train_path, cfg.problem.test_path}) {
    if (!path.empty() && !std::filesystem::exists(path)) {
      throw ParseError(problem_line, "data file does not exist: " + path);
    }
  }

  if (!cfg.init.from_config) {
    const bool linear_model = cfg.problem.kind == ProblemKind::kSvm ||
                              cfg.problem.kind == ProblemKind::kLogistic;
    cfg.init.kind = InitSpec::Kind::kGaussian;
    cfg.init.value = linear_model ? 0.1 : 1.0;
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  return parse_experiment_config(in);
}

// ---------- problem construction ----------

namespace {

struct BuiltProblem {
  std::unique_ptr<Problem> problem;
  bool bilinear = false;
  bool linear_model = false;
  LinearModelKind model_kind = LinearModelKind::kSvmSquaredHinge;
  std::optional<FeatureMatrix> test_features;
  std::vector<double> test_labels;
};

BuiltProblem build_linear_model(const ProblemSpec& spec) {
  const LinearModelKind kind = spec.kind == ProblemKind::kSvm
                                   ? LinearModelKind::kSvmSquaredHinge
                                   : LinearModelKind::kLogistic;
  Dataset train;
  Dataset test;
  bool have_test = false;
  std::size_t map_in_dim = 0;

  if (spec.synth) {
    // One pool, one separating hyperplane: the held-out rows must come from
    // the same distribution as the training rows or test accuracy measures
    // nothing.  The training split is the pool prefix.
    RngStream synth_rng(spec.data_seed, stream_id::kSynth);
    const auto n_train = static_cast<std::size_t>(spec.synth->n_train);
    const auto n_test = static_cast<std::size_t>(spec.synth->n_test);
    Dataset pool = synth_dataset(synth_rng, n_train + n_test, spec.synth->dim,
                                 spec.synth->margin)
                       .data;
    train.max_index = pool.max_index;
    test.max_index = pool.max_index;
    for (std::size_t i = 0; i < pool.n(); ++i) {
      Dataset& side = i < n_train ? train : test;
      side.rows.push_back(std::move(pool.rows[i]));
      side.labels.push_back(pool.labels[i]);
    }
    have_test = n_test > 0;
    map_in_dim = static_cast<std::size_t>(spec.synth->dim);
  } else {
    train = parse_libsvm_file(spec.train_path);
    if (!spec.test_path.empty()) {
      test = parse_libsvm_file(spec.test_path);
      have_test = true;
    }
    const int raw = std::max(train.raw_dim(), have_test ? test.raw_dim() : 0);
    if (raw <= 0) throw std::runtime_error("dataset has no features");
    map_in_dim = static_cast<std::size_t>(raw);
  }
  if (train.n() == 0) throw std::runtime_error("training split is empty");
  if (have_test && test.n() == 0) throw std::runtime_error("test split is empty");

  // One label alphabet across both splits, so train/test predictions agree
  // on which raw value is the positive class.
  std::vector<double> combined = train.labels;
  combined.insert(combined.end(), test.labels.begin(), test.labels.end());
  combined = normalize_labels(combined, kind == LinearModelKind::kSvmSquaredHinge
                                            ? LabelMode::kSvm
                                            : LabelMode::kLogistic);
  std::vector<double> train_labels(combined.begin(),
                                   combined.begin() + static_cast<long>(train.n()));
  std::vector<double> test_labels(combined.begin() + static_cast<long>(train.n()),
                                  combined.end());

  const RandomFeatureMap map(spec.data_seed, static_cast<std::size_t>(spec.features),
                             map_in_dim);
  BuiltProblem built;
  built.problem = std::make_unique<LinearModelProblem>(kind, map.apply(train),
                                                       std::move(train_labels));
  built.linear_model = true;
  built.model_kind = kind;
  if (have_test) {
    built.test_features = map.apply(test);
    built.test_labels = std::move(test_labels);
  }
  return built;
}

BuiltProblem build_problem(const ProblemSpec& spec) {
  switch (spec.kind) {
    case ProblemKind::kBilinear: {
      BuiltProblem built;
      built.problem =
          std::make_unique<BilinearProblem>(static_cast<std::size_t>(spec.dim / 2));
      built.bilinear = true;
      return built;
    }
    case ProblemKind::kQuadratic: {
      BuiltProblem built;
      built.problem = std::make_unique<QuadraticProblem>(
          QuadraticProblem::diagonal(spec.eigenvalues));
      return built;
    }
    case ProblemKind::kSvm:
    case ProblemKind::kLogistic:
      return build_linear_model(spec);
  }
  throw std::logic_error("unhandled problem kind");
}

}  // namespace

// ---------- evaluation helpers ----------

double compute_test_accuracy(LinearModelKind kind, const FeatureMatrix& features,
                             const std::vector<double>& labels, const Vec& x) {
  if (features.n == 0) throw std::invalid_argument("empty test split");
  if (labels.size() != features.n) {
    throw std::invalid_argument("label/feature count mismatch");
  }
  if (x.size() != features.dim) {
    throw std::invalid_argument("test accuracy: dimension mismatch");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < features.n; ++i) {
    const double* row = features.row(i);
    double score = 0.0;
    for (std::size_t j = 0; j < features.dim; ++j) score += row[j] * x[j];
    // sigmoid(score) >= 1/2 exactly when score >= 0, so both modes reduce to
    // the sign with ties predicted positive.
    const double negative = kind == LinearModelKind::kSvmSquaredHinge ? -1.0 : 0.0;
    const double predicted = score >= 0.0 ? 1.0 : negative;
    if (predicted == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(features.n);
}

// ---------- output writers ----------

namespace {

void emit_optional(std::ostream& out, const std::optional<double>& v) {
  if (v) out << format_double(*v);
}

}  // namespace

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  out << "iter,loss,trace_hessian,balance,test_accuracy,f_reg\n";
  for (const TrajectoryRecord& rec : traj.records) {
    out << rec.iter << ',' << format_double(rec.loss) << ',';
    emit_optional(out, rec.hessian_trace);
    out << ',';
    emit_optional(out, rec.balance);
    out << ',';
    emit_optional(out, rec.test_accuracy);
    out << ',';
    emit_optional(out, rec.reg_loss);
    out << '\n';
  }
}

namespace {

std::string cell_file_name(const std::string& label, std::uint64_t seed) {
  return label + "_" + std::to_string(seed) + ".csv";
}

// Mean/SE accumulators for one summary column, fed only by cells that carry
// the value.
struct ColumnStats {
  RunningStats stats;
  void add(const std::optional<double>& v) {
    if (v) stats.add(*v);
  }
};

void write_summary_csv(const ExperimentResult& result, const ExperimentConfig& cfg,
                       std::ostream& out) {
  out << "optimizer,seed,status,steps,selected_iter,final_loss,final_trace,"
         "final_balance,final_test_accuracy,final_f_reg,loss_gap,trace_gap\n";
  for (const CellResult& cell : result.cells) {
    out << cell.optimizer << ',' << cell.seed << ','
        << (cell.diverged ? "diverged" : "ok") << ',' << cell.steps << ',';
    if (cell.selected_iter >= 0) out << cell.selected_iter;
    out << ',';
    emit_optional(out, cell.final_loss);
    out << ',';
    emit_optional(out, cell.final_trace);
    out << ',';
    emit_optional(out, cell.final_balance);
    out << ',';
    emit_optional(out, cell.final_test_accuracy);
    out << ',';
    emit_optional(out, cell.final_reg_loss);
    out << ',';
    emit_optional(out, cell.selected_loss_gap);
    out << ',';
    emit_optional(out, cell.selected_trace_gap);
    out << '\n';
  }

  // Aggregates over the non-diverged seeds of each optimizer, as mean/se row
  // pairs with an empty seed column.
  const std::size_t n_seed = cfg.seeds.size();
  for (std::size_t oi = 0; oi < cfg.optimizers.size(); ++oi) {
    ColumnStats cols[7];
    for (std::size_t si = 0; si < n_seed; ++si) {
      const CellResult& cell = result.cells[oi * n_seed + si];
      if (cell.diverged) continue;
      cols[0].add(cell.final_loss);
      cols[1].add(cell.final_trace);
      cols[2].add(cell.final_balance);
      cols[3].add(cell.final_test_accuracy);
      cols[4].add(cell.final_reg_loss);
      cols[5].add(cell.selected_loss_gap);
      cols[6].add(cell.selected_trace_gap);
    }
    const std::string& label = cfg.optimizers[oi].label;
    out << label << ",,mean,,";
    for (ColumnStats& col : cols) {
      out << ',';
      if (col.stats.count() > 0) out << format_double(col.stats.mean());
    }
    out << '\n';
    out << label << ",,se,,";
    for (ColumnStats& col : cols) {
      out << ',';
      if (col.stats.count() > 1) out << format_double(col.stats.std_error());
    }
    out << '\n';
  }
}

std::string describe_problem(const ProblemSpec& spec) {
  std::ostringstream os;
  switch (spec.kind) {
    case ProblemKind::kBilinear:
      os << "bilinear (dim " << spec.dim << ")";
      break;
    case ProblemKind::kQuadratic:
      os << "quadratic (dim " << spec.eigenvalues.size() << ", diagonal spectrum)";
      break;
    case ProblemKind::kSvm:
    case ProblemKind::kLogistic:
      os << (spec.kind == ProblemKind::kSvm ? "svm" : "logistic");
      if (spec.synth) {
        os << " synth n=" << spec.synth->n_train << " dim=" << spec.synth->dim
           << " margin=" << spec.synth->margin;
        if (spec.synth->n_test > 0) os << " test-n=" << spec.synth->n_test;
      } else {
        os << " train=" << spec.train_path;
        if (!spec.test_path.empty()) os << " test=" << spec.test_path;
      }
      os << " features=" << spec.features << " data-seed=" << spec.data_seed;
      break;
  }
  return os.str();
}

std::string describe_optimizer(const OptimizerSpec& opt) {
  std::ostringstream os;
  switch (opt.kind) {
    case OptimizerKind::kGd:
      os << "gd eta=" << opt.eta;
      break;
    case OptimizerKind::kZo:
      os << "zo eta=" << opt.eta << " lambda=" << opt.lambda;
      break;
    case OptimizerKind::kZoLimit:
      os << "zo-limit eta=" << opt.eta;
      break;
  }
  return os.str();
}

void report_stat_line(std::ostream& out, const char* name, const ColumnStats& col) {
  if (col.stats.count() == 0) return;
  char buf[128];
  std::snprintf(buf, sizeof buf, "  %-20s mean %-14.6g se %-14.6g n=%lld\n", name,
                col.stats.mean(), col.stats.count() > 1 ? col.stats.std_error() : 0.0,
                static_cast<long long>(col.stats.count()));
  out << buf;
}

void write_report(const ExperimentResult& result, const ExperimentConfig& cfg,
                  std::ostream& out) {
  out << "problem: " << describe_problem(cfg.problem) << '\n';
  out << "iterations: " << cfg.iterations << "  record-every: " << cfg.record_every
      << "  output-rule: "
      << (cfg.output_rule == OutputRule::kLast
              ? "last"
              : cfg.output_rule == OutputRule::kAverage ? "average" : "uniform")
      << '\n';
  out << "init: "
      << (cfg.init.kind == InitSpec::Kind::kGaussian ? "gaussian " : "constant ")
      << cfg.init.value << '\n';
  out << "seeds (" << cfg.seeds.size() << "):";
  for (std::uint64_t seed : cfg.seeds) out << ' ' << seed;
  out << "\n\n";

  const std::size_t n_seed = cfg.seeds.size();
  for (std::size_t oi = 0; oi < cfg.optimizers.size(); ++oi) {
    const OptimizerSpec& opt = cfg.optimizers[oi];
    ColumnStats loss, trace, balance, accuracy, loss_gap, trace_gap;
    int diverged = 0;
    for (std::size_t si = 0; si < n_seed; ++si) {
      const CellResult& cell = result.cells[oi * n_seed + si];
      if (cell.diverged) {
        ++diverged;
        continue;
      }
      loss.add(cell.final_loss);
      trace.add(cell.final_trace);
      balance.add(cell.final_balance);
      accuracy.add(cell.final_test_accuracy);
      loss_gap.add(cell.selected_loss_gap);
      trace_gap.add(cell.selected_trace_gap);
    }
    out << opt.label << ": " << describe_optimizer(opt) << '\n';
    out << "  cells: " << n_seed << "  diverged: " << diverged << '\n';
    report_stat_line(out, "final loss", loss);
    report_stat_line(out, "final trace", trace);
    report_stat_line(out, "final balance", balance);
    report_stat_line(out, "test accuracy", accuracy);
    report_stat_line(out, "selected loss gap", loss_gap);
    report_stat_line(out, "selected trace gap", trace_gap);
    for (std::size_t si = 0; si < n_seed; ++si) {
      const CellResult& cell = result.cells[oi * n_seed + si];
      if (cell.diverged) {
        out << "  seed " << cell.seed << " diverged: " << cell.error << '\n';
      }
    }
    out << '\n';
  }
}

}  // namespace

// ---------- execution ----------

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  ExperimentConfig resolved = cfg;
  if (opts.seed_override) resolved.seeds = {*opts.seed_override};
  if (!opts.out_dir_override.empty()) resolved.out_dir = opts.out_dir_override;
  if (resolved.seeds.empty()) throw std::invalid_argument("no seeds to run");
  if (resolved.optimizers.empty()) throw std::invalid_argument("no optimizers to run");
  if (opts.jobs < 1) throw std::invalid_argument("jobs must be >= 1");

  const BuiltProblem built = build_problem(resolved.problem);
  const Problem& p = *built.problem;
  const std::size_t dim = p.dim();

  std::filesystem::create_directories(resolved.out_dir);

  const std::size_t n_seed = resolved.seeds.size();
  const std::size_t n_cells = resolved.optimizers.size() * n_seed;
  std::vector<CellResult> cells(n_cells);

  auto run_cell = [&](std::size_t cell) {
    const std::size_t oi = cell / n_seed;
    const std::size_t si = cell % n_seed;
    const OptimizerSpec& opt = resolved.optimizers[oi];
    const std::uint64_t seed = resolved.seeds[si];

    CellResult& res = cells[cell];
    res.optimizer = opt.label;
    res.seed = seed;

    // The init stream depends only on the seed, so every optimizer starts a
    // given seed from the same point and comparisons pair up.
    Vec x0(dim);
    if (resolved.init.kind == InitSpec::Kind::kGaussian) {
      RngStream init_rng(seed, stream_id::kInit);
      init_rng.fill_gaussian(x0);
      scale(x0, resolved.init.value);
    } else {
      x0.assign(dim, resolved.init.value);
    }

    const double cell_lambda = opt.kind == OptimizerKind::kZo ? opt.lambda : 0.0;
    DiagnosticsHooks hooks;
    if (p.has_hessian_trace()) {
      hooks.hessian_trace = [&p](const Vec& x) { return p.hessian_trace(x); };
      hooks.reg_loss = [&p, cell_lambda](const Vec& x) {
        return p.value(x) + 0.5 * cell_lambda * cell_lambda * p.hessian_trace(x);
      };
    }
    if (built.bilinear) {
      hooks.balance = [](const Vec& x) { return balance_metric(x); };
    }
    if (built.test_features) {
      const FeatureMatrix& tf = *built.test_features;
      const std::vector<double>& tl = built.test_labels;
      const LinearModelKind mk = built.model_kind;
      hooks.test_accuracy = [&tf, &tl, mk](const Vec& x) {
        return compute_test_accuracy(mk, tf, tl, x);
      };
    }

    Trajectory traj;
    try {
      if (opt.kind == OptimizerKind::kGd) {
        traj = run_gd(p, opt.eta, resolved.iterations, x0, hooks,
                      resolved.record_every, resolved.output_rule);
      } else {
        OptimizerConfig oc;
        oc.eta = opt.eta;
        oc.lambda = cell_lambda;
        oc.T = resolved.iterations;
        oc.seed = seed;
        oc.stream = static_cast<std::uint64_t>(oi);  // disjoint per optimizer
        oc.record_every = resolved.record_every;
        oc.output_rule = resolved.output_rule;
        traj = run_zo(p, oc, x0, hooks);
      }
    } catch (const DivergenceError& e) {
      res.diverged = true;
      res.error = e.what();
      traj = e.partial;
    }

    res.steps = traj.steps;
    if (!traj.records.empty()) {
      const TrajectoryRecord& last = traj.records.back();
      res.final_loss = last.loss;
      res.final_trace = last.hessian_trace;
      res.final_balance = last.balance;
      res.final_test_accuracy = last.test_accuracy;
      res.final_reg_loss = last.reg_loss;
    }
    if (!res.diverged) {
      res.selected_iter = traj.selected_iter;
      const FlatnessReport report = flatness_report(p, traj.selected_x, cell_lambda);
      res.selected_loss_gap = report.loss_gap;
      res.selected_trace_gap = report.trace_gap;
    }

    const std::filesystem::path path =
        std::filesystem::path(resolved.out_dir) / cell_file_name(opt.label, seed);
    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open " + path.string());
    write_trajectory_csv(traj, file);
    if (!file) throw std::runtime_error("failed writing " + path.string());
  };

  const int jobs = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(opts.jobs), n_cells));
  if (jobs <= 1) {
    for (std::size_t cell = 0; cell < n_cells; ++cell) run_cell(cell);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error = nullptr;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(jobs));
    for (int w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        while (true) {
          const std::size_t cell = next.fetch_add(1);
          if (cell >= n_cells) return;
          try {
            run_cell(cell);
          } catch (...) {
            const std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
          }
        }
      });
    }
    for (std::thread& worker : workers) worker.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  ExperimentResult result;
  result.cells = std::move(cells);
  result.out_dir = resolved.out_dir;
  for (const CellResult& cell : result.cells) {
    if (cell.diverged) ++result.diverged;
  }

  {
    const std::filesystem::path path =
        std::filesystem::path(resolved.out_dir) / "summary.csv";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    write_summary_csv(result, resolved, out);
  }
  {
    const std::filesystem::path path =
        std::filesystem::path(resolved.out_dir) / "report.txt";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    write_report(result, resolved, out);
  }
  return result;
}

}  // namespace zoflat
