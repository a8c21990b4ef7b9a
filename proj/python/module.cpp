#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "pagd/alloc.hpp"
#include "pagd/channel.hpp"
#include "pagd/descent.hpp"
#include "pagd/errors.hpp"
#include "pagd/harness.hpp"
#include "pagd/lqr.hpp"
#include "pagd/objectives.hpp"

namespace py = pybind11;
using namespace pagd;

namespace {

// Dicts cross the boundary as JSON text; keeps the config schema in one place.
nlohmann::json to_cpp_json(const py::object& obj) {
  const auto text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
  return nlohmann::json::parse(text);
}

py::object to_py_json(const nlohmann::json& doc) {
  return py::module_::import("json").attr("loads")(doc.dump());
}

}  // namespace

PYBIND11_MODULE(pagd, m) {
  m.doc() = "Power-allocated gradient descent over noisy analog channels";
  m.attr("__version__") = std::string(library_version());

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidInputError>(m, "InvalidInputError", base.ptr());
  py::register_exception<InfeasibleBudgetError>(m, "InfeasibleBudgetError", base.ptr());
  py::register_exception<InstabilityError>(m, "InstabilityError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<InvalidCapError>(m, "InvalidCapError", base.ptr());

  // ---- allocation and schedules ----

  py::class_<AllocationSolution>(m, "AllocationSolution")
      .def_readonly("w", &AllocationSolution::w)
      .def_readonly("switch_index", &AllocationSolution::switch_index)
      .def_readonly("objective", &AllocationSolution::objective)
      .def_readonly("multiplier", &AllocationSolution::lambda)
      .def_readonly("order", &AllocationSolution::order);

  m.def(
      "solve_floored_allocation",
      [](std::vector<double> weights, double budget, double floor, const std::string& search) {
        if (search != "linear" && search != "binary") {
          throw InvalidInputError("search must be 'linear' or 'binary'");
        }
        return solve_floored_allocation(
            {std::move(weights), budget, floor},
            search == "binary" ? SwitchSearch::kBinary : SwitchSearch::kLinear);
      },
      py::arg("weights"), py::arg("budget"), py::arg("floor") = 0.0,
      py::arg("search") = "linear",
      "Minimize sum a_i / w_i subject to sum w_i = budget and w_i >= floor.");
  m.def(
      "solve_unconstrained_allocation",
      [](std::vector<double> weights, double budget) {
        return solve_unconstrained_allocation({std::move(weights), budget, 0.0});
      },
      py::arg("weights"), py::arg("budget"));

  py::class_<PowerSchedule>(m, "PowerSchedule")
      .def_readonly("sigma_sq", &PowerSchedule::sigma_sq)
      .def_readonly("t_switch", &PowerSchedule::t_switch)
      .def_readonly("avg_budget", &PowerSchedule::avg_budget)
      .def_readonly("floor", &PowerSchedule::floor)
      .def_readonly("gamma", &PowerSchedule::gamma)
      .def_readonly("switch_rule_empty", &PowerSchedule::switch_rule_empty)
      .def_property_readonly("policy",
                             [](const PowerSchedule& s) { return std::string(to_string(s.policy)); })
      .def("total_power", &PowerSchedule::total_power)
      .def("__len__", &PowerSchedule::horizon);

  m.def("ctg_schedule", &ctg_schedule, py::arg("horizon"), py::arg("avg_budget"),
        py::arg("mu"), py::arg("eta"), py::arg("floor"));
  m.def("geometric_schedule", &geometric_schedule, py::arg("horizon"),
        py::arg("avg_budget"), py::arg("mu"), py::arg("eta"));
  m.def("constant_schedule", &constant_schedule, py::arg("horizon"), py::arg("avg_budget"));

  // ---- channel ----

  py::class_<ChannelSpec>(m, "ChannelSpec")
      .def(py::init([](double noise_power, double noise_bound, double grad_bound,
                       std::size_t dim, const std::string& model) {
             ChannelSpec s{noise_power, noise_bound, grad_bound, dim, parse_noise_model(model)};
             s.validate();
             return s;
           }),
           py::arg("noise_power") = 0.0, py::arg("noise_bound") = 1.0,
           py::arg("grad_bound") = 1.0, py::arg("dim") = 1, py::arg("model") = "two-point")
      .def_readwrite("noise_power", &ChannelSpec::noise_power)
      .def_readwrite("noise_bound", &ChannelSpec::noise_bound)
      .def_readwrite("grad_bound", &ChannelSpec::grad_bound)
      .def_readwrite("dim", &ChannelSpec::dim)
      .def_property(
          "model", [](const ChannelSpec& s) { return std::string(to_string(s.model)); },
          [](ChannelSpec& s, const std::string& name) { s.model = parse_noise_model(name); });

  py::class_<NoiseGenerator>(m, "NoiseGenerator")
      .def(py::init<const ChannelSpec&>(), py::arg("spec"))
      .def("draw", py::overload_cast<std::uint64_t>(&NoiseGenerator::draw, py::const_),
           py::arg("seed"));

  m.def("derive_seed", &derive_seed, py::arg("root"), py::arg("index"));
  m.def("encode", &encode, py::arg("gradient"), py::arg("power"), py::arg("spec"));
  m.def("decode", &decode, py::arg("received"), py::arg("power"), py::arg("spec"));
  m.def("transmit", &transmit, py::arg("encoded"), py::arg("spec"), py::arg("seed"));

  // ---- descent ----

  py::class_<ProblemConstants>(m, "ProblemConstants")
      .def(py::init([](double mu, double L, double G, double D, double v) {
             ProblemConstants c{mu, L, G, D, v};
             c.validate();
             return c;
           }),
           py::arg("mu"), py::arg("L"), py::arg("G"), py::arg("D") = kUnbounded,
           py::arg("v") = kUnbounded)
      .def_readwrite("mu", &ProblemConstants::mu)
      .def_readwrite("L", &ProblemConstants::L)
      .def_readwrite("G", &ProblemConstants::G)
      .def_readwrite("D", &ProblemConstants::D)
      .def_readwrite("v", &ProblemConstants::v)
      .def("__repr__", [](const ProblemConstants& c) {
        std::ostringstream os;
        os << "ProblemConstants(mu=" << c.mu << ", L=" << c.L << ", G=" << c.G
           << ", D=" << c.D << ", v=" << c.v << ")";
        return os.str();
      });

  py::class_<ObjectiveOracle>(m, "Objective")
      .def(py::init([](std::function<double(const Eigen::VectorXd&)> f,
                       std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad,
                       std::size_t dim, const ProblemConstants& constants, double f_star) {
             return ObjectiveOracle{std::move(f), std::move(grad), f_star, constants, dim};
           }),
           py::arg("f"), py::arg("grad"), py::arg("dim"), py::arg("constants"),
           py::arg("f_star") = 0.0)
      .def("__call__", [](const ObjectiveOracle& o, const Eigen::VectorXd& x) { return o.eval(x); })
      .def("gradient", [](const ObjectiveOracle& o, const Eigen::VectorXd& x) { return o.grad(x); })
      .def_readonly("f_star", &ObjectiveOracle::f_star)
      .def_readonly("constants", &ObjectiveOracle::constants)
      .def_readonly("dim", &ObjectiveOracle::dim);

  m.def("quadratic_objective", &make_quadratic_oracle, py::arg("curvature"), py::arg("x0"),
        "f(x) = 0.5 x' diag(h) x; G certified on the sublevel set through x0.");
  m.def("linear_spectrum", &linear_spectrum, py::arg("dim"), py::arg("mu"), py::arg("L"));
  m.def(
      "nonconvex_pl_objective",
      [](std::size_t dim, double level, double radius) {
        return make_nonconvex_pl_oracle({dim, level, radius});
      },
      py::arg("dim") = 2, py::arg("level") = 20.0, py::arg("radius") = 1.0);

  py::class_<RunTrace>(m, "RunTrace")
      .def_readonly("z", &RunTrace::z)
      .def_readonly("grad_norm", &RunTrace::grad_norm)
      .def_readonly("sigma_sq", &RunTrace::sigma_sq)
      .def_readonly("step_norm", &RunTrace::step_norm)
      .def_readonly("iterates", &RunTrace::iterates)
      .def_readonly("eta", &RunTrace::eta)
      .def_readonly("seed", &RunTrace::seed)
      .def_readonly("t_switch", &RunTrace::t_switch)
      .def_readonly("sublevel_violations", &RunTrace::sublevel_violations)
      .def_readonly("radius_violations", &RunTrace::radius_violations)
      .def_readonly("aborted", &RunTrace::aborted)
      .def_readonly("abort_reason", &RunTrace::abort_reason)
      .def_property_readonly("final_suboptimality", &RunTrace::final_suboptimality)
      .def("to_csv", [](const RunTrace& t) {
        std::ostringstream os;
        write_trace_csv(os, t);
        return os.str();
      });

  m.def("run_pagd", &run_pagd, py::arg("objective"), py::arg("schedule"), py::arg("channel"),
        py::arg("x0"), py::arg("eta"), py::arg("seed"));

  py::class_<GeometricBound>(m, "GeometricBound")
      .def_readonly("loose", &GeometricBound::loose)
      .def_readonly("tight", &GeometricBound::tight);
  m.def("constant_power_bound", &constant_power_bound, py::arg("constants"), py::arg("eta"),
        py::arg("horizon"), py::arg("avg_budget"), py::arg("noise_power"), py::arg("z0"));
  m.def("geometric_bound", &geometric_bound, py::arg("constants"), py::arg("eta"),
        py::arg("horizon"), py::arg("avg_budget"), py::arg("noise_power"), py::arg("z0"));
  m.def("ctg_bound", &ctg_bound, py::arg("constants"), py::arg("eta"), py::arg("horizon"),
        py::arg("avg_budget"), py::arg("noise_power"), py::arg("schedule"), py::arg("z0"));
  m.def("local_power_floor", &local_power_floor, py::arg("constants"), py::arg("eta"),
        py::arg("noise_bound"));

  // ---- LQR ----

  auto lq = m.def_submodule("lqr", "Policy optimization for discrete-time LQR");

  py::class_<lqr::LqrInstance>(lq, "Instance")
      .def(py::init([](Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd Q,
                       Eigen::MatrixXd R, Eigen::MatrixXd Sigma_w) {
             lqr::LqrInstance inst{std::move(A), std::move(B), std::move(Q), std::move(R),
                                   std::move(Sigma_w)};
             inst.validate();
             return inst;
           }),
           py::arg("A"), py::arg("B"), py::arg("Q"), py::arg("R"), py::arg("Sigma_w"))
      .def_readonly("A", &lqr::LqrInstance::A)
      .def_readonly("B", &lqr::LqrInstance::B)
      .def_readonly("Q", &lqr::LqrInstance::Q)
      .def_readonly("R", &lqr::LqrInstance::R)
      .def_readonly("Sigma_w", &lqr::LqrInstance::Sigma_w)
      .def_property_readonly("states", &lqr::LqrInstance::states)
      .def_property_readonly("inputs", &lqr::LqrInstance::inputs);

  py::class_<lqr::ReferenceSolution>(lq, "Reference")
      .def_readonly("K", &lqr::ReferenceSolution::K)
      .def_readonly("P", &lqr::ReferenceSolution::P)
      .def_readonly("cost", &lqr::ReferenceSolution::cost)
      .def_readonly("iterations", &lqr::ReferenceSolution::iterations);

  py::class_<lqr::LqrConstants>(lq, "Constants")
      .def_readonly("J_cap", &lqr::LqrConstants::J_cap)
      .def_readonly("zeta", &lqr::LqrConstants::zeta)
      .def_readonly("xi", &lqr::LqrConstants::xi)
      .def_readonly("G", &lqr::LqrConstants::G)
      .def_readonly("L", &lqr::LqrConstants::L)
      .def_readonly("D", &lqr::LqrConstants::D)
      .def_readonly("mu", &lqr::LqrConstants::mu)
      .def_readonly("warnings", &lqr::LqrConstants::warnings)
      .def("problem_constants", &lqr::LqrConstants::problem_constants);

  lq.def("load_instance", &lqr::load_instance, py::arg("path"));
  lq.def("cost", &lqr::cost, py::arg("instance"), py::arg("K"));
  lq.def("gradient", &lqr::gradient, py::arg("instance"), py::arg("K"));
  lq.def("state_covariance", &lqr::state_covariance, py::arg("instance"), py::arg("K"));
  lq.def("solve_lyapunov", &lqr::solve_lyapunov, py::arg("M"), py::arg("S"),
         "Solve X = M X M^T + S for stable M.");
  lq.def("spectral_radius", &lqr::spectral_radius, py::arg("M"));
  lq.def("reference_optimum", &lqr::reference_optimum, py::arg("instance"));
  lq.def("default_cost_cap", &lqr::default_cost_cap, py::arg("optimal_cost"),
         py::arg("margin") = 0.1);
  lq.def("regularity_constants",
         py::overload_cast<const lqr::LqrInstance&, double, double>(&lqr::regularity_constants),
         py::arg("instance"), py::arg("J_cap"), py::arg("optimal_cost"));
  lq.def(
      "estimate_constants",
      [](const lqr::LqrInstance& inst, double level, const lqr::ReferenceSolution& ref,
         std::size_t samples, std::uint64_t seed) {
        lqr::EmpiricalOptions o;
        o.samples = samples;
        o.seed = seed;
        return lqr::estimate_constants(inst, level, ref, o);
      },
      py::arg("instance"), py::arg("level"), py::arg("reference"), py::arg("samples") = 200,
      py::arg("seed") = 7);
  lq.def("initial_policy", &lqr::initial_policy, py::arg("instance"), py::arg("reference"),
         py::arg("target_cost"));
  lq.def("objective", &lqr::make_lqr_oracle, py::arg("instance"), py::arg("constants"),
         py::arg("optimal_cost"));
  lq.def("flatten", &lqr::flatten, py::arg("K"));
  lq.def("unflatten", &lqr::unflatten, py::arg("x"), py::arg("rows"), py::arg("cols"));

  py::class_<lqr::LqrRun>(lq, "Run")
      .def_readonly("trace", &lqr::LqrRun::trace)
      .def_readonly("schedule", &lqr::LqrRun::schedule)
      .def_readonly("constants", &lqr::LqrRun::constants)
      .def_readonly("reference", &lqr::LqrRun::reference)
      .def_readonly("power_floor", &lqr::LqrRun::power_floor)
      .def_readonly("bound", &lqr::LqrRun::bound);
  lq.def(
      "run_pagd",
      [](const lqr::LqrInstance& inst, const Eigen::MatrixXd& K0, double eta,
         std::size_t horizon, double avg_budget, ChannelSpec channel, std::uint64_t seed,
         std::optional<double> cost_cap, const std::string& constants) {
        lqr::LqrRunOptions o;
        o.cost_cap = cost_cap;
        o.mode = lqr::parse_constants_mode(constants);
        return lqr::run_pagd_lqr(inst, K0, eta, horizon, avg_budget, channel, seed, o);
      },
      py::arg("instance"), py::arg("K0"), py::arg("eta"), py::arg("horizon"),
      py::arg("avg_budget"), py::arg("channel"), py::arg("seed"),
      py::arg("cost_cap") = py::none(), py::arg("constants") = "lemma");

  // ---- experiments ----

  py::class_<Summary>(m, "Summary")
      .def_readonly("count", &Summary::count)
      .def_readonly("mean", &Summary::mean)
      .def_readonly("stddev", &Summary::stddev)
      .def_readonly("std_error", &Summary::std_error);

  py::class_<PolicyOutcome>(m, "PolicyOutcome")
      .def_property_readonly("policy",
                             [](const PolicyOutcome& o) { return std::string(to_string(o.policy)); })
      .def_readonly("schedule", &PolicyOutcome::schedule)
      .def_readonly("final_z", &PolicyOutcome::final_z)
      .def_readonly("stats", &PolicyOutcome::stats)
      .def_readonly("noiseless_z", &PolicyOutcome::noiseless_z)
      .def_readonly("bound_name", &PolicyOutcome::bound_name)
      .def_readonly("bound", &PolicyOutcome::bound)
      .def_readonly("bound_loose", &PolicyOutcome::bound_loose)
      .def_readonly("bound_ratio", &PolicyOutcome::bound_ratio)
      .def_readonly("paths_sublevel_violation", &PolicyOutcome::paths_sublevel_violation)
      .def_readonly("paths_radius_violation", &PolicyOutcome::paths_radius_violation)
      .def_readonly("aborted_paths", &PolicyOutcome::aborted_paths);

  py::class_<PairedDifference>(m, "PairedDifference")
      .def_property_readonly("policy",
                             [](const PairedDifference& d) { return std::string(to_string(d.policy)); })
      .def_property_readonly(
          "baseline", [](const PairedDifference& d) { return std::string(to_string(d.baseline)); })
      .def_readonly("diff", &PairedDifference::diff)
      .def_readonly("stats", &PairedDifference::stats);

  py::class_<ExperimentReport>(m, "Report")
      .def_property_readonly("config",
                             [](const ExperimentReport& r) { return to_py_json(r.config.to_json()); })
      .def_readonly("eta", &ExperimentReport::eta)
      .def_readonly("avg_budget", &ExperimentReport::avg_budget)
      .def_readonly("power_floor", &ExperimentReport::power_floor)
      .def_readonly("z0", &ExperimentReport::z0)
      .def_readonly("constants", &ExperimentReport::constants)
      .def_readonly("outcomes", &ExperimentReport::outcomes)
      .def_readonly("paired", &ExperimentReport::paired)
      .def_property_readonly("slopes",
                             [](const ExperimentReport& r) {
                               py::dict out;
                               for (const auto& [p, s] : r.slopes) out[py::str(std::string(to_string(p)))] = s;
                               return out;
                             })
      .def("outcome", [](const ExperimentReport& r, const std::string& policy) {
        return r.outcome(parse_schedule_policy(policy));
      })
      .def("write", &write_report, py::arg("directory"));

  m.def(
      "default_config", [] { return to_py_json(ExperimentConfig{}.to_json()); },
      "Default experiment configuration as a dict.");
  m.def(
      "run_experiment",
      [](const py::object& config) {
        return run_experiment(ExperimentConfig::from_json(to_cpp_json(config)));
      },
      py::arg("config") = py::dict(),
      "Monte Carlo over seeds for one schedule; config keys as in the CLI JSON file.");
  m.def(
      "compare_schedules",
      [](const py::object& config) {
        return compare_schedules(ExperimentConfig::from_json(to_cpp_json(config)));
      },
      py::arg("config") = py::dict(),
      "Paired comparison of schedules under common random numbers.");
}
