// Python bindings for the core operations: problems, estimators, optimizer
// loops, diagnostics, oracles, parameter schedules and the sparse-data
// utilities.  Vectors cross the boundary as plain Python lists.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "zoflat/data.hpp"
#include "zoflat/diagnostics.hpp"
#include "zoflat/estimators.hpp"
#include "zoflat/experiment.hpp"
#include "zoflat/linear_models.hpp"
#include "zoflat/optimizer.hpp"
#include "zoflat/oracle.hpp"
#include "zoflat/param_select.hpp"
#include "zoflat/problems.hpp"
#include "zoflat/rng.hpp"

namespace py = pybind11;
using namespace zoflat;

namespace {

DiagnosticsHooks standard_hooks(const Problem& p, bool record_trace,
                                bool record_balance) {
  DiagnosticsHooks hooks;
  if (record_trace && p.has_hessian_trace()) {
    hooks.hessian_trace = [&p](const Vec& x) { return p.hessian_trace(x); };
  }
  if (record_balance) {
    hooks.balance = [](const Vec& x) { return balance_metric(x); };
  }
  return hooks;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Zeroth-order optimization with trace-of-Hessian regularization";

  py::register_exception<ParseError>(m, "ParseError");

  // ---------- rng ----------

  py::class_<RngStream>(m, "RngStream")
      .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("seed"),
           py::arg("stream"))
      .def("next_u64", &RngStream::next_u64)
      .def("next_unit", &RngStream::next_unit)
      .def("next_below", &RngStream::next_below, py::arg("n"))
      .def("next_gaussian", &RngStream::next_gaussian)
      .def("gaussian_vector", &RngStream::gaussian_vector, py::arg("d"));

  // ---------- problems ----------

  py::class_<Problem>(m, "Problem")
      .def("dim", &Problem::dim)
      .def("value", &Problem::value, py::arg("x"))
      .def("has_gradient", &Problem::has_gradient)
      .def("gradient", &Problem::gradient, py::arg("x"))
      .def("has_hessian_trace", &Problem::has_hessian_trace)
      .def("hessian_trace", &Problem::hessian_trace, py::arg("x"))
      .def("has_third_derivatives", &Problem::has_third_derivatives)
      .def("third_contraction", &Problem::third_contraction, py::arg("x"),
           py::arg("u"))
      .def("hessian_trace_gradient", &Problem::hessian_trace_gradient,
           py::arg("x"))
      .def("is_convex", &Problem::is_convex)
      .def("optimum_value", &Problem::optimum_value)
      .def("min_trace_over_optima", &Problem::min_trace_over_optima);

  py::class_<BilinearProblem, Problem>(m, "BilinearProblem")
      .def(py::init<std::size_t>(), py::arg("half_dim"))
      .def("half_dim", &BilinearProblem::half_dim);

  py::class_<QuadraticProblem, Problem>(m, "QuadraticProblem")
      .def_static("diagonal", &QuadraticProblem::diagonal, py::arg("eigenvalues"),
                  py::arg("constant") = 0.0);

  py::class_<CubicProblem, Problem>(m, "CubicProblem")
      .def(py::init<std::size_t, std::vector<double>, std::vector<double>, Vec>(),
           py::arg("d"), py::arg("tensor"), py::arg("matrix"), py::arg("linear"))
      .def("third_partial_squared_sum", &CubicProblem::third_partial_squared_sum);

  m.def("random_cubic", &random_cubic, py::arg("d"), py::arg("rng"),
        py::arg("scale") = 1.0);

  py::enum_<LinearModelKind>(m, "LinearModelKind")
      .value("SVM_SQUARED_HINGE", LinearModelKind::kSvmSquaredHinge)
      .value("LOGISTIC", LinearModelKind::kLogistic);

  py::class_<FeatureMatrix>(m, "FeatureMatrix")
      .def(py::init([](std::size_t n, std::size_t dim, std::vector<double> values) {
             if (values.size() != n * dim) {
               throw std::invalid_argument("values must hold n*dim entries");
             }
             FeatureMatrix f;
             f.n = n;
             f.dim = dim;
             f.values = std::move(values);
             return f;
           }),
           py::arg("n"), py::arg("dim"), py::arg("values"))
      .def_readonly("n", &FeatureMatrix::n)
      .def_readonly("dim", &FeatureMatrix::dim)
      .def_readonly("values", &FeatureMatrix::values);

  py::class_<LinearModelProblem, Problem>(m, "LinearModelProblem")
      .def(py::init<LinearModelKind, FeatureMatrix, std::vector<double>>(),
           py::arg("kind"), py::arg("features"), py::arg("labels"))
      .def("sample_count", &LinearModelProblem::sample_count);

  // ---------- estimators ----------

  py::class_<McEstimate>(m, "McEstimate")
      .def_readonly("mean", &McEstimate::mean)
      .def_readonly("std_error", &McEstimate::std_error)
      .def_readonly("n", &McEstimate::n);

  m.def("two_point", &two_point, py::arg("problem"), py::arg("x"), py::arg("u"),
        py::arg("lambda_"));
  m.def("two_point_coeff", &two_point_coeff, py::arg("problem"), py::arg("x"),
        py::arg("u"), py::arg("lambda_"));
  m.def("directional_limit", &directional_limit, py::arg("problem"),
        py::arg("x"), py::arg("u"));
  m.def("h0_sample", &h0_sample, py::arg("problem"), py::arg("x"), py::arg("u"));
  m.def("smoothed_loss_mc", &smoothed_loss_mc, py::arg("problem"), py::arg("x"),
        py::arg("lambda_"), py::arg("n"), py::arg("rng"));
  m.def("expected_sharpness", &expected_sharpness, py::arg("problem"),
        py::arg("x"), py::arg("delta"), py::arg("n"), py::arg("rng"));
  m.def("hutchinson_trace", &hutchinson_trace, py::arg("problem"), py::arg("x"),
        py::arg("delta"), py::arg("n"), py::arg("rng"));

  // ---------- optimizer ----------

  py::enum_<OutputRule>(m, "OutputRule")
      .value("UNIFORM_RANDOM_ITERATE", OutputRule::kUniformRandomIterate)
      .value("LAST", OutputRule::kLast)
      .value("AVERAGE", OutputRule::kAverage);

  py::class_<TrajectoryRecord>(m, "TrajectoryRecord")
      .def_readonly("iter", &TrajectoryRecord::iter)
      .def_readonly("loss", &TrajectoryRecord::loss)
      .def_readonly("hessian_trace", &TrajectoryRecord::hessian_trace)
      .def_readonly("balance", &TrajectoryRecord::balance)
      .def_readonly("test_accuracy", &TrajectoryRecord::test_accuracy)
      .def_readonly("reg_loss", &TrajectoryRecord::reg_loss);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("records", &Trajectory::records)
      .def_readonly("final_x", &Trajectory::final_x)
      .def_readonly("selected_x", &Trajectory::selected_x)
      .def_readonly("selected_iter", &Trajectory::selected_iter)
      .def_readonly("steps", &Trajectory::steps);

  m.def(
      "run_zo",
      [](const Problem& p, double eta, double lambda, long long iterations,
         std::uint64_t seed, const Vec& x0, std::uint64_t stream,
         long long record_every, OutputRule rule, bool record_trace,
         bool record_balance) {
        OptimizerConfig cfg;
        cfg.eta = eta;
        cfg.lambda = lambda;
        cfg.T = iterations;
        cfg.seed = seed;
        cfg.stream = stream;
        cfg.record_every = record_every;
        cfg.output_rule = rule;
        return run_zo(p, cfg, x0, standard_hooks(p, record_trace, record_balance));
      },
      py::arg("problem"), py::arg("eta"), py::arg("lambda_"),
      py::arg("iterations"), py::arg("seed"), py::arg("x0"),
      py::arg("stream") = 0, py::arg("record_every") = 1,
      py::arg("rule") = OutputRule::kLast, py::arg("record_trace") = false,
      py::arg("record_balance") = false,
      "Zeroth-order SGD; lambda > 0 uses the two-point coefficient, "
      "lambda == 0 the directional-derivative limit.");

  m.def(
      "run_gd",
      [](const Problem& p, double eta, long long iterations, const Vec& x0,
         long long record_every, OutputRule rule, bool record_trace,
         bool record_balance) {
        return run_gd(p, eta, iterations, x0,
                      standard_hooks(p, record_trace, record_balance),
                      record_every, rule);
      },
      py::arg("problem"), py::arg("eta"), py::arg("iterations"), py::arg("x0"),
      py::arg("record_every") = 1, py::arg("rule") = OutputRule::kLast,
      py::arg("record_trace") = false, py::arg("record_balance") = false);

  // ---------- diagnostics ----------

  py::class_<FlatnessReport>(m, "FlatnessReport")
      .def_readonly("lambda_", &FlatnessReport::lambda)
      .def_readonly("f_value", &FlatnessReport::f_value)
      .def_readonly("hessian_trace", &FlatnessReport::hessian_trace)
      .def_readonly("reg_loss", &FlatnessReport::reg_loss)
      .def_readonly("loss_gap", &FlatnessReport::loss_gap)
      .def_readonly("trace_gap", &FlatnessReport::trace_gap);

  py::class_<DriftCheck>(m, "DriftCheck")
      .def_readonly("measured", &DriftCheck::measured)
      .def_readonly("predicted", &DriftCheck::predicted)
      .def_readonly("std_error", &DriftCheck::std_error)
      .def_readonly("samples", &DriftCheck::samples);

  py::class_<VectorDriftCheck>(m, "VectorDriftCheck")
      .def_readonly("measured", &VectorDriftCheck::measured)
      .def_readonly("predicted", &VectorDriftCheck::predicted)
      .def_readonly("std_error", &VectorDriftCheck::std_error)
      .def_readonly("samples", &VectorDriftCheck::samples);

  m.def("regularized_loss", &regularized_loss, py::arg("problem"), py::arg("x"),
        py::arg("lambda_"));
  m.def("flatness_report", &flatness_report, py::arg("problem"), py::arg("x"),
        py::arg("lambda_"));
  m.def("balance_metric", &balance_metric, py::arg("x"));
  m.def("balance_decay_test", &balance_decay_test, py::arg("x"),
        py::arg("lambda_"), py::arg("eta"), py::arg("m"), py::arg("rng"));
  m.def("implicit_drift_test", &implicit_drift_test, py::arg("problem"),
        py::arg("x"), py::arg("lambda_"), py::arg("eta"), py::arg("m"),
        py::arg("rng"));

  // ---------- oracle ----------

  m.def(
      "pairing_count",
      [](int n) { return enumerate_pairings(n).pairings.size(); }, py::arg("n"),
      "Number of perfect matchings on n labeled points ((n-1)!! for even n).");
  m.def("gaussian_moment", &gaussian_moment, py::arg("labels"), py::arg("d"));

  py::class_<MomentCheck>(m, "MomentCheck")
      .def_readonly("name", &MomentCheck::name)
      .def_readonly("measured", &MomentCheck::measured)
      .def_readonly("predicted", &MomentCheck::predicted)
      .def_readonly("std_error", &MomentCheck::std_error)
      .def_readonly("samples", &MomentCheck::samples);

  m.def("verify_second_moments", &verify_second_moments, py::arg("problem"),
        py::arg("x"), py::arg("n"), py::arg("rng"));

  // ---------- parameter schedules ----------

  py::class_<ParameterInputs>(m, "ParameterInputs")
      .def(py::init([](double epsilon, double dim, double l1, double l2,
                       double l3, double radius) {
             ParameterInputs in;
             in.epsilon = epsilon;
             in.dim = dim;
             in.l1 = l1;
             in.l2 = l2;
             in.l3 = l3;
             in.radius = radius;
             return in;
           }),
           py::arg("epsilon"), py::arg("dim"), py::arg("l1"), py::arg("l2"),
           py::arg("l3"), py::arg("radius"))
      .def_readwrite("epsilon", &ParameterInputs::epsilon)
      .def_readwrite("dim", &ParameterInputs::dim)
      .def_readwrite("l1", &ParameterInputs::l1)
      .def_readwrite("l2", &ParameterInputs::l2)
      .def_readwrite("l3", &ParameterInputs::l3)
      .def_readwrite("radius", &ParameterInputs::radius);

  py::class_<ParameterPlan>(m, "ParameterPlan")
      .def_readonly("lambda_sq", &ParameterPlan::lambda_sq)
      .def_readonly("iterations", &ParameterPlan::iterations)
      .def_readonly("eta", &ParameterPlan::eta);

  m.def("select_parameters_main", &select_parameters_main, py::arg("inputs"));
  m.def("select_parameters_alt", &select_parameters_alt, py::arg("inputs"));

  py::class_<RateRegime>(m, "RateRegime")
      .def_readonly("lambda_order", &RateRegime::lambda_order)
      .def_readonly("eta_order", &RateRegime::eta_order)
      .def_readonly("iteration_order", &RateRegime::iteration_order);

  m.def(
      "rate_regime",
      [](const std::string& assumptions) {
        return rate_regime(parse_assumption_set(assumptions));
      },
      py::arg("assumptions"),
      "Asymptotic schedule orders for a constant set such as 'L1,L2,L3'.");

  // ---------- sparse data ----------

  py::class_<SparseRow>(m, "SparseRow")
      .def_readonly("entries", &SparseRow::entries);

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("labels", &Dataset::labels)
      .def_readonly("rows", &Dataset::rows)
      .def_readonly("max_index", &Dataset::max_index)
      .def("n", &Dataset::n)
      .def("raw_dim", &Dataset::raw_dim);

  m.def(
      "parse_libsvm",
      [](const std::string& text) {
        std::istringstream in(text);
        return parse_libsvm(in);
      },
      py::arg("text"));
  m.def("parse_libsvm_file", &parse_libsvm_file, py::arg("path"));
  m.def("serialize_libsvm", &serialize_libsvm, py::arg("dataset"));

  py::class_<SyntheticData>(m, "SyntheticData")
      .def_readonly("data", &SyntheticData::data)
      .def_readonly("separator", &SyntheticData::separator);

  m.def("synth_dataset", &synth_dataset, py::arg("rng"), py::arg("n"),
        py::arg("d"), py::arg("margin"));

  py::class_<RandomFeatureMap>(m, "RandomFeatureMap")
      .def(py::init<std::uint64_t, std::size_t, std::size_t>(), py::arg("seed"),
           py::arg("out_dim"), py::arg("in_dim"))
      .def("out_dim", &RandomFeatureMap::out_dim)
      .def("in_dim", &RandomFeatureMap::in_dim)
      .def("apply", &RandomFeatureMap::apply, py::arg("dataset"));

  // ---------- experiment harness ----------

  py::class_<CellResult>(m, "CellResult")
      .def_readonly("optimizer", &CellResult::optimizer)
      .def_readonly("seed", &CellResult::seed)
      .def_readonly("diverged", &CellResult::diverged)
      .def_readonly("error", &CellResult::error)
      .def_readonly("steps", &CellResult::steps)
      .def_readonly("selected_iter", &CellResult::selected_iter)
      .def_readonly("final_loss", &CellResult::final_loss)
      .def_readonly("final_trace", &CellResult::final_trace)
      .def_readonly("final_balance", &CellResult::final_balance)
      .def_readonly("final_test_accuracy", &CellResult::final_test_accuracy)
      .def_readonly("final_reg_loss", &CellResult::final_reg_loss);

  py::class_<ExperimentResult>(m, "ExperimentResult")
      .def_readonly("cells", &ExperimentResult::cells)
      .def_readonly("out_dir", &ExperimentResult::out_dir)
      .def_readonly("diverged", &ExperimentResult::diverged);

  m.def(
      "run_config_file",
      [](const std::string& path, const std::string& out_dir, int jobs,
         std::optional<std::uint64_t> seed_override) {
        const ExperimentConfig cfg = load_experiment_config(path);
        RunOptions opts;
        opts.out_dir_override = out_dir;
        opts.jobs = jobs;
        opts.seed_override = seed_override;
        return run_experiment(cfg, opts);
      },
      py::arg("path"), py::arg("out_dir") = std::string(), py::arg("jobs") = 1,
      py::arg("seed_override") = std::nullopt,
      "Parses a config file and runs the full grid, writing CSV artifacts.");
}
