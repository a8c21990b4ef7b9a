#include "pagd/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "format.hpp"
#include "pagd/errors.hpp"
#include "pagd/objectives.hpp"

#ifndef PAGD_VERSION
#define PAGD_VERSION "0.0.0"
#endif

namespace pagd {
namespace {

using detail::format_double;
using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Setup {
  ObjectiveOracle oracle;
  Eigen::VectorXd x0;
  ChannelSpec channel;
  double z0 = 0.0;
  double eta = 0.0;
  double power_floor = 0.0;
  double avg_budget = 0.0;
};

std::vector<SchedulePolicy> default_policies(ExperimentMode mode) {
  if (mode == ExperimentMode::kSyntheticGlobal) {
    return {SchedulePolicy::kConstant, SchedulePolicy::kGeometric};
  }
  return {SchedulePolicy::kConstant, SchedulePolicy::kCtg};
}

double step_limit(SchedulePolicy policy, const ProblemConstants& c) {
  switch (policy) {
    case SchedulePolicy::kConstant:
      return 1.0 / c.L;
    case SchedulePolicy::kGeometric:
      return 0.5 / c.L;
    case SchedulePolicy::kCtg:
      return std::min(c.D / c.G, 0.25 / c.L);
  }
  return 0.0;
}

void check_step(SchedulePolicy policy, const ProblemConstants& c, double eta) {
  switch (policy) {
    case SchedulePolicy::kConstant:
      check_constant_power_step(c, eta);
      break;
    case SchedulePolicy::kGeometric:
      check_geometric_step(c, eta);
      break;
    case SchedulePolicy::kCtg:
      check_local_step(c, eta);
      break;
  }
}

void check_config(const ExperimentConfig& cfg) {
  if (cfg.horizon == 0) throw InvalidInputError("config: T must be at least 1");
  if (cfg.seeds == 0) throw InvalidInputError("config: seeds must be at least 1");
  if (!(cfg.avg_budget > 0.0) && !(cfg.budget_ratio > 0.0)) {
    throw InvalidInputError("config: avg_budget or budget_ratio must be positive");
  }
  if (cfg.mode == ExperimentMode::kLqr && cfg.instance.empty()) {
    throw InvalidInputError("config: lqr mode needs an instance file");
  }
  if (cfg.mode != ExperimentMode::kSyntheticGlobal &&
      !(cfg.start_fraction > 0.0 && cfg.start_fraction <= 0.5)) {
    throw InvalidInputError(
        "config: start_fraction must lie in (0, 0.5] so that f(x0) <= v/2");
  }
  for (std::size_t T : cfg.sweep_horizons) {
    if (T == 0) throw InvalidInputError("config: sweep horizons must be >= 1");
  }
}

Setup build_setup(const ExperimentConfig& cfg,
                  const std::vector<SchedulePolicy>& policies) {
  check_config(cfg);
  Setup s;
  switch (cfg.mode) {
    case ExperimentMode::kSyntheticGlobal: {
      const Eigen::VectorXd h = linear_spectrum(cfg.dim, cfg.mu, cfg.L);
      s.x0 = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(cfg.dim),
                                       cfg.x0_scale);
      s.oracle = make_quadratic_oracle(h, s.x0);
      break;
    }
    case ExperimentMode::kSyntheticLocal: {
      NonconvexPlOptions opts;
      opts.dim = cfg.dim;
      opts.level = cfg.level;
      opts.radius = cfg.radius;
      s.oracle = make_nonconvex_pl_oracle(opts);
      const double r0 = nonconvex_pl_radius(cfg.start_fraction * cfg.level);
      s.x0 = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(cfg.dim),
                                       r0 / std::sqrt(static_cast<double>(cfg.dim)));
      break;
    }
    case ExperimentMode::kLqr: {
      const lqr::LqrInstance inst = lqr::load_instance(cfg.instance);
      const lqr::ReferenceSolution ref = lqr::reference_optimum(inst);
      const double cap = lqr::default_cost_cap(ref.cost, cfg.cap_margin);
      const ProblemConstants constants =
          cfg.constants == lqr::ConstantsMode::kLemma
              ? lqr::regularity_constants(inst, cap, ref.cost).problem_constants()
              : lqr::estimate_constants(inst, cap, ref);
      Eigen::MatrixXd K0;
      if (auto given = lqr::load_initial_policy(cfg.instance)) {
        K0 = *given;
      } else {
        K0 = lqr::initial_policy(inst, ref, cfg.start_fraction * cap);
      }
      s.oracle = lqr::make_lqr_oracle(inst, constants, ref.cost);
      s.x0 = lqr::flatten(K0);
      break;
    }
  }
  const ProblemConstants& c = s.oracle.constants;
  s.z0 = s.oracle.eval(s.x0) - s.oracle.f_star;

  if (cfg.eta > 0.0) {
    s.eta = cfg.eta;
  } else {
    double limit = kUnbounded;
    for (SchedulePolicy p : policies) limit = std::min(limit, step_limit(p, c));
    s.eta = 0.9 * limit;
  }
  for (SchedulePolicy p : policies) check_step(p, c, s.eta);

  s.power_floor = local_power_floor(c, s.eta, cfg.noise_bound);
  if (cfg.budget_ratio > 0.0) {
    if (!(s.power_floor > 0.0)) {
      throw InvalidInputError(
          "config: budget_ratio needs a positive power floor (local modes)");
    }
    s.avg_budget = cfg.budget_ratio * s.power_floor;
  } else {
    s.avg_budget = cfg.avg_budget;
  }
  if (s.avg_budget < s.power_floor) {
    std::ostringstream os;
    os << "Insufficient budget for power allocation: average budget "
       << s.avg_budget << " is below the power floor " << s.power_floor;
    throw InfeasibleBudgetError(os.str());
  }

  s.channel.noise_power = cfg.noise_power;
  s.channel.noise_bound = cfg.noise_bound;
  s.channel.grad_bound = c.G;
  s.channel.dim = static_cast<std::size_t>(s.x0.size());
  s.channel.model = cfg.noise_model;
  s.channel.validate();
  return s;
}

PowerSchedule make_schedule(SchedulePolicy policy, std::size_t horizon,
                            const Setup& s) {
  const ProblemConstants& c = s.oracle.constants;
  switch (policy) {
    case SchedulePolicy::kConstant:
      return constant_schedule(horizon, s.avg_budget);
    case SchedulePolicy::kGeometric:
      return geometric_schedule(horizon, s.avg_budget, c.mu, s.eta);
    case SchedulePolicy::kCtg:
      return ctg_schedule(horizon, s.avg_budget, c.mu, s.eta, s.power_floor);
  }
  throw InvalidInputError("unknown schedule policy");
}

struct BoundValue {
  std::string name;
  double value = kNaN;
  double loose = kNaN;
};

BoundValue policy_bound(SchedulePolicy policy, const PowerSchedule& schedule,
                        const Setup& s, double noise_power) {
  const ProblemConstants& c = s.oracle.constants;
  const std::size_t T = schedule.horizon();
  switch (policy) {
    case SchedulePolicy::kConstant:
      return {"constant-power",
              constant_power_bound(c, s.eta, T, s.avg_budget, noise_power, s.z0),
              kNaN};
    case SchedulePolicy::kGeometric: {
      const GeometricBound b =
          geometric_bound(c, s.eta, T, s.avg_budget, noise_power, s.z0);
      return {"geometric", b.tight, b.loose};
    }
    case SchedulePolicy::kCtg:
      return {"ctg",
              ctg_bound(c, s.eta, T, s.avg_budget, noise_power, schedule, s.z0),
              kNaN};
  }
  return {};
}

struct Replica {
  double z_final = 0.0;
  std::size_t sublevel = 0;
  std::size_t radius = 0;
  bool aborted = false;
  RunTrace trace;  // kept for index 0 only
};

PolicyOutcome run_policy(SchedulePolicy policy, std::size_t horizon,
                         const Setup& s, const ExperimentConfig& cfg) {
  PolicyOutcome out;
  out.policy = policy;
  out.schedule = make_schedule(policy, horizon, s);

  std::vector<Replica> reps = replicate(
      cfg.seeds, cfg.root_seed, [&](std::size_t index, std::uint64_t seed) {
        RunTrace trace = run_pagd(s.oracle, out.schedule, s.channel, s.x0, s.eta, seed);
        Replica r;
        r.z_final = trace.final_suboptimality();
        r.sublevel = trace.sublevel_violations;
        r.radius = trace.radius_violations;
        r.aborted = trace.aborted;
        if (index == 0) r.trace = std::move(trace);
        return r;
      });

  out.final_z.reserve(reps.size());
  for (const Replica& r : reps) {
    out.final_z.push_back(r.z_final);
    if (r.sublevel > 0) ++out.paths_sublevel_violation;
    if (r.radius > 0) ++out.paths_radius_violation;
    if (r.aborted) ++out.aborted_paths;
  }
  out.sample_trace = std::move(reps.front().trace);
  out.stats = summarize(out.final_z);

  ChannelSpec quiet = s.channel;
  quiet.noise_power = 0.0;
  out.noiseless_z =
      run_pagd(s.oracle, out.schedule, quiet, s.x0, s.eta, cfg.root_seed)
          .final_suboptimality();

  const BoundValue b = policy_bound(policy, out.schedule, s, cfg.noise_power);
  out.bound_name = b.name;
  out.bound = b.value;
  out.bound_loose = b.loose;
  out.bound_ratio = out.stats.mean / out.bound;
  return out;
}

ExperimentReport make_report(const ExperimentConfig& cfg, const Setup& s) {
  ExperimentReport report;
  report.config = cfg;
  report.eta = s.eta;
  report.avg_budget = s.avg_budget;
  report.power_floor = s.power_floor;
  report.z0 = s.z0;
  report.constants = s.oracle.constants;
  return report;
}

json number_or_null(double value) {
  return std::isfinite(value) ? json(value) : json(nullptr);
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInputError("cannot write " + path.string());
  out << text;
}

}  // namespace

std::string_view library_version() { return PAGD_VERSION; }

std::string_view to_string(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::kSyntheticGlobal:
      return "synthetic-global";
    case ExperimentMode::kSyntheticLocal:
      return "synthetic-local";
    case ExperimentMode::kLqr:
      return "lqr";
  }
  return "unknown";
}

ExperimentMode parse_experiment_mode(std::string_view name) {
  if (name == "synthetic-global") return ExperimentMode::kSyntheticGlobal;
  if (name == "synthetic-local") return ExperimentMode::kSyntheticLocal;
  if (name == "lqr") return ExperimentMode::kLqr;
  throw InvalidInputError("unknown mode '" + std::string(name) +
                          "' (expected synthetic-global, synthetic-local or lqr)");
}

json ExperimentConfig::to_json() const {
  json pol = json::array();
  for (SchedulePolicy p : policies) pol.push_back(std::string(pagd::to_string(p)));
  return {{"mode", std::string(pagd::to_string(mode))},
          {"T", horizon},
          {"eta", eta},
          {"avg_budget", avg_budget},
          {"budget_ratio", budget_ratio},
          {"noise_power", noise_power},
          {"noise_bound", noise_bound},
          {"noise_model", std::string(pagd::to_string(noise_model))},
          {"schedule", std::string(pagd::to_string(schedule))},
          {"policies", pol},
          {"seeds", seeds},
          {"root_seed", root_seed},
          {"dim", dim},
          {"mu", mu},
          {"L", L},
          {"x0_scale", x0_scale},
          {"start_fraction", start_fraction},
          {"level", level},
          {"radius", radius},
          {"instance", instance},
          {"cap_margin", cap_margin},
          {"constants", std::string(lqr::to_string(constants))},
          {"sweep_T", sweep_horizons},
          {"output", output}};
}

ExperimentConfig ExperimentConfig::from_json(const json& doc,
                                             ExperimentConfig cfg) {
  if (!doc.is_object()) throw InvalidInputError("config must be a JSON object");
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "mode") {
        cfg.mode = parse_experiment_mode(value.get<std::string>());
      } else if (key == "T") {
        cfg.horizon = value.get<std::size_t>();
      } else if (key == "eta") {
        cfg.eta = value.get<double>();
      } else if (key == "avg_budget") {
        cfg.avg_budget = value.get<double>();
      } else if (key == "budget_ratio") {
        cfg.budget_ratio = value.get<double>();
      } else if (key == "noise_power") {
        cfg.noise_power = value.get<double>();
      } else if (key == "noise_bound") {
        cfg.noise_bound = value.get<double>();
      } else if (key == "noise_model") {
        cfg.noise_model = parse_noise_model(value.get<std::string>());
      } else if (key == "schedule") {
        cfg.schedule = parse_schedule_policy(value.get<std::string>());
      } else if (key == "policies") {
        cfg.policies.clear();
        for (const auto& p : value) {
          cfg.policies.push_back(parse_schedule_policy(p.get<std::string>()));
        }
      } else if (key == "seeds") {
        cfg.seeds = value.get<std::size_t>();
      } else if (key == "root_seed") {
        cfg.root_seed = value.get<std::uint64_t>();
      } else if (key == "dim") {
        cfg.dim = value.get<std::size_t>();
      } else if (key == "mu") {
        cfg.mu = value.get<double>();
      } else if (key == "L") {
        cfg.L = value.get<double>();
      } else if (key == "x0_scale") {
        cfg.x0_scale = value.get<double>();
      } else if (key == "start_fraction") {
        cfg.start_fraction = value.get<double>();
      } else if (key == "level") {
        cfg.level = value.get<double>();
      } else if (key == "radius") {
        cfg.radius = value.get<double>();
      } else if (key == "instance") {
        cfg.instance = value.get<std::string>();
      } else if (key == "cap_margin") {
        cfg.cap_margin = value.get<double>();
      } else if (key == "constants") {
        cfg.constants = lqr::parse_constants_mode(value.get<std::string>());
      } else if (key == "sweep_T") {
        cfg.sweep_horizons = value.get<std::vector<std::size_t>>();
      } else if (key == "output") {
        cfg.output = value.get<std::string>();
      } else {
        throw InvalidInputError("config: unknown field '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw InvalidInputError(std::string("config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
  return from_json(doc, ExperimentConfig{});
}

const PolicyOutcome& ExperimentReport::outcome(SchedulePolicy policy) const {
  for (const PolicyOutcome& o : outcomes) {
    if (o.policy == policy) return o;
  }
  throw InvalidInputError("report has no outcome for policy " +
                          std::string(to_string(policy)));
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  const Setup s = build_setup(config, {config.schedule});
  ExperimentReport report = make_report(config, s);
  report.outcomes.push_back(run_policy(config.schedule, config.horizon, s, config));
  return report;
}

ExperimentReport compare_schedules(const ExperimentConfig& config) {
  const std::vector<SchedulePolicy> policies =
      config.policies.empty() ? default_policies(config.mode) : config.policies;
  const Setup s = build_setup(config, policies);
  ExperimentReport report = make_report(config, s);

  for (SchedulePolicy p : policies) {
    report.outcomes.push_back(run_policy(p, config.horizon, s, config));
  }
  const PolicyOutcome& base = report.outcomes.front();
  for (std::size_t k = 1; k < report.outcomes.size(); ++k) {
    const PolicyOutcome& o = report.outcomes[k];
    PairedDifference d;
    d.policy = o.policy;
    d.baseline = base.policy;
    d.diff.resize(o.final_z.size());
    for (std::size_t i = 0; i < d.diff.size(); ++i) {
      d.diff[i] = o.final_z[i] - base.final_z[i];
    }
    d.stats = summarize(d.diff);
    report.paired.push_back(std::move(d));
  }

  for (SchedulePolicy p : policies) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t T : config.sweep_horizons) {
      const PolicyOutcome o = run_policy(p, T, s, config);
      SweepPoint pt;
      pt.horizon = T;
      pt.policy = p;
      pt.stats = o.stats;
      pt.noiseless_z = o.noiseless_z;
      pt.noise_component = o.stats.mean - o.noiseless_z;
      pt.bound = o.bound;
      report.sweep.push_back(pt);
      if (pt.noise_component > 0.0) {
        xs.push_back(static_cast<double>(T));
        ys.push_back(pt.noise_component);
      }
    }
    if (xs.size() >= 2) report.slopes.emplace_back(p, log_log_slope(xs, ys));
  }
  return report;
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InvalidInputError("slope fit needs two or more paired points");
  }
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<std::string> write_report(const ExperimentReport& report,
                                      const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> files;
  auto emit = [&](const std::string& name, const std::string& text) {
    write_file(dir / name, text);
    files.push_back(name);
  };

  {
    std::ostringstream os;
    os << "policy,seeds,mean_z_T,stddev,stderr,noiseless_z_T,bound_name,bound,"
          "bound_loose,bound_ratio,paths_sublevel_violation,"
          "paths_radius_violation,aborted_paths\n";
    for (const PolicyOutcome& o : report.outcomes) {
      os << to_string(o.policy) << ',' << o.stats.count << ','
         << format_double(o.stats.mean) << ',' << format_double(o.stats.stddev)
         << ',' << format_double(o.stats.std_error) << ','
         << format_double(o.noiseless_z) << ',' << o.bound_name << ','
         << format_double(o.bound) << ',' << format_double(o.bound_loose) << ','
         << format_double(o.bound_ratio) << ',' << o.paths_sublevel_violation
         << ',' << o.paths_radius_violation << ',' << o.aborted_paths << '\n';
    }
    emit("summary.csv", os.str());
  }
  {
    std::ostringstream os;
    os << "seed_index,seed";
    for (const PolicyOutcome& o : report.outcomes) os << ",z_T_" << to_string(o.policy);
    os << '\n';
    const std::size_t n = report.outcomes.empty() ? 0 : report.outcomes[0].final_z.size();
    for (std::size_t i = 0; i < n; ++i) {
      os << i << ',' << derive_seed(report.config.root_seed, i);
      for (const PolicyOutcome& o : report.outcomes) {
        os << ',' << format_double(o.final_z[i]);
      }
      os << '\n';
    }
    emit("seeds.csv", os.str());
  }
  for (const PolicyOutcome& o : report.outcomes) {
    const std::string tag(to_string(o.policy));
    std::ostringstream sched;
    sched << "t,sigma_sq\n";
    for (std::size_t t = 0; t < o.schedule.sigma_sq.size(); ++t) {
      sched << t << ',' << format_double(o.schedule.sigma_sq[t]) << '\n';
    }
    emit("schedule_" + tag + ".csv", sched.str());
    std::ostringstream trace;
    write_trace_csv(trace, o.sample_trace);
    emit("trace_" + tag + ".csv", trace.str());
  }
  if (!report.paired.empty()) {
    std::ostringstream os;
    std::vector<std::string> header{"seed_index"};
    for (const PairedDifference& d : report.paired) {
      header.push_back("diff_" + std::string(to_string(d.policy)) + "_minus_" +
                       std::string(to_string(d.baseline)));
    }
    os << join(header, ',') << '\n';
    for (std::size_t i = 0; i < report.paired[0].diff.size(); ++i) {
      os << i;
      for (const PairedDifference& d : report.paired) {
        os << ',' << format_double(d.diff[i]);
      }
      os << '\n';
    }
    emit("paired.csv", os.str());

    std::ostringstream ps;
    ps << "policy,baseline,mean_diff,paired_stderr,z_score\n";
    for (const PairedDifference& d : report.paired) {
      ps << to_string(d.policy) << ',' << to_string(d.baseline) << ','
         << format_double(d.stats.mean) << ',' << format_double(d.stats.std_error)
         << ',' << format_double(d.stats.mean / d.stats.std_error) << '\n';
    }
    emit("paired_summary.csv", ps.str());
  }
  if (!report.sweep.empty()) {
    std::ostringstream os;
    os << "T,policy,mean_z_T,stderr,noiseless_z_T,noise_component,bound\n";
    for (const SweepPoint& p : report.sweep) {
      os << p.horizon << ',' << to_string(p.policy) << ','
         << format_double(p.stats.mean) << ',' << format_double(p.stats.std_error)
         << ',' << format_double(p.noiseless_z) << ','
         << format_double(p.noise_component) << ',' << format_double(p.bound)
         << '\n';
    }
    emit("sweep.csv", os.str());
    std::ostringstream sl;
    sl << "policy,slope\n";
    for (const auto& [policy, slope] : report.slopes) {
      sl << to_string(policy) << ',' << format_double(slope) << '\n';
    }
    emit("slopes.csv", sl.str());
  }

  const ProblemConstants& c = report.constants;
  json manifest = {
      {"version", std::string(library_version())},
      {"config", report.config.to_json()},
      {"resolved",
       {{"eta", report.eta},
        {"avg_budget", report.avg_budget},
        {"power_floor", report.power_floor},
        {"z0", report.z0},
        {"constants",
         {{"mu", c.mu},
          {"L", c.L},
          {"G", c.G},
          {"D", number_or_null(c.D)},
          {"v", number_or_null(c.v)}}}}},
      {"files", files}};
  files.push_back("manifest.json");
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return files;
}

}  // namespace pagd
