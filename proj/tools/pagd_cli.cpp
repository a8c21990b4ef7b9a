// pagd: power-allocated gradient descent simulator.
//
//   pagd alloc      --T 20 --mu 1 --eta 0.1 --avg-budget 1 --floor 0.5
//   pagd run        --config exp.json --seeds 500
//   pagd compare    --mode synthetic-global --sweep-T 25,50,100 --output out
//   pagd lqr-solve  --instance data/lqr_3x2.json
//
// Exit codes: 0 success, 2 invalid config, 3 infeasible budget,
// 4 numerical failure.

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "pagd/alloc.hpp"
#include "pagd/errors.hpp"
#include "pagd/harness.hpp"
#include "pagd/lqr.hpp"

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNumerical = 4;

int exit_code(pagd::ErrorKind kind) {
  switch (kind) {
    case pagd::ErrorKind::kInfeasibleBudget:
      return kExitInfeasible;
    case pagd::ErrorKind::kInstability:
    case pagd::ErrorKind::kNumericalFailure:
      return kExitNumerical;
    case pagd::ErrorKind::kInvalidInput:
    case pagd::ErrorKind::kInvalidCap:
      return kExitInvalid;
  }
  return kExitInvalid;
}

// Flags that were given on the command line, applied over the config file.
class ConfigFlags {
 public:
  void attach(CLI::App* app) {
    app->add_option("--config", config_path_, "JSON experiment config")
        ->check(CLI::ExistingFile);
    add(app, "--mode", mode_, "synthetic-global | synthetic-local | lqr",
        [this](auto& c) { c.mode = pagd::parse_experiment_mode(mode_); });
    add(app, "--T", cfg_.horizon, "iterations",
        [this](auto& c) { c.horizon = cfg_.horizon; });
    add(app, "--eta", cfg_.eta, "step size; <= 0 picks 0.9 of the largest allowed",
        [this](auto& c) { c.eta = cfg_.eta; });
    add(app, "--avg-budget", cfg_.avg_budget, "average transmit power",
        [this](auto& c) { c.avg_budget = cfg_.avg_budget; });
    add(app, "--budget-ratio", cfg_.budget_ratio,
        "average power as a multiple of the power floor",
        [this](auto& c) { c.budget_ratio = cfg_.budget_ratio; });
    add(app, "--noise-power", cfg_.noise_power, "channel noise power",
        [this](auto& c) { c.noise_power = cfg_.noise_power; });
    add(app, "--noise-bound", cfg_.noise_bound, "almost-sure noise norm bound",
        [this](auto& c) { c.noise_bound = cfg_.noise_bound; });
    add(app, "--noise-model", noise_model_,
        "two-point | fixed-radius | truncated-gaussian",
        [this](auto& c) { c.noise_model = pagd::parse_noise_model(noise_model_); });
    add(app, "--schedule", schedule_, "constant | geometric | ctg",
        [this](auto& c) { c.schedule = pagd::parse_schedule_policy(schedule_); });
    add(app, "--policies", policies_, "policies to compare",
        [this](auto& c) {
          c.policies.clear();
          for (const auto& p : policies_) {
            c.policies.push_back(pagd::parse_schedule_policy(p));
          }
        })
        ->delimiter(',');
    add(app, "--seeds", cfg_.seeds, "Monte Carlo replications",
        [this](auto& c) { c.seeds = cfg_.seeds; });
    add(app, "--root-seed", cfg_.root_seed, "root seed",
        [this](auto& c) { c.root_seed = cfg_.root_seed; });
    add(app, "--dim", cfg_.dim, "synthetic dimension",
        [this](auto& c) { c.dim = cfg_.dim; });
    add(app, "--mu", cfg_.mu, "quadratic: smallest curvature",
        [this](auto& c) { c.mu = cfg_.mu; });
    add(app, "--L", cfg_.L, "quadratic: largest curvature",
        [this](auto& c) { c.L = cfg_.L; });
    add(app, "--x0-scale", cfg_.x0_scale, "quadratic: start at scale * ones",
        [this](auto& c) { c.x0_scale = cfg_.x0_scale; });
    add(app, "--start-fraction", cfg_.start_fraction,
        "local modes: f(x0) as a fraction of the sublevel value",
        [this](auto& c) { c.start_fraction = cfg_.start_fraction; });
    add(app, "--level", cfg_.level, "local objective: sublevel value v",
        [this](auto& c) { c.level = cfg_.level; });
    add(app, "--radius", cfg_.radius, "local objective: smoothness radius D",
        [this](auto& c) { c.radius = cfg_.radius; });
    add(app, "--instance", cfg_.instance, "LQR instance JSON",
        [this](auto& c) { c.instance = cfg_.instance; });
    add(app, "--cap-margin", cfg_.cap_margin, "LQR cost cap 4 J* (1 + margin)",
        [this](auto& c) { c.cap_margin = cfg_.cap_margin; });
    add(app, "--constants", constants_, "LQR constants: lemma | empirical",
        [this](auto& c) { c.constants = pagd::lqr::parse_constants_mode(constants_); });
    add(app, "--sweep-T", cfg_.sweep_horizons, "horizons for the sweep",
        [this](auto& c) { c.sweep_horizons = cfg_.sweep_horizons; })
        ->delimiter(',');
    add(app, "--output", cfg_.output, "output directory",
        [this](auto& c) { c.output = cfg_.output; });
  }

  pagd::ExperimentConfig resolve() const {
    pagd::ExperimentConfig cfg;
    if (!config_path_.empty()) {
      std::ifstream in(config_path_);
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw pagd::InvalidInputError("config " + config_path_ + ": " + e.what());
      }
      cfg = pagd::ExperimentConfig::from_json(doc, cfg);
    }
    for (const auto& [opt, apply] : flags_) {
      if (opt->count() > 0) apply(cfg);
    }
    return cfg;
  }

 private:
  template <class T>
  CLI::Option* add(CLI::App* app, const std::string& name, T& target,
                   const std::string& help,
                   std::function<void(pagd::ExperimentConfig&)> apply) {
    CLI::Option* opt = app->add_option(name, target, help);
    flags_.emplace_back(opt, std::move(apply));
    return opt;
  }

  pagd::ExperimentConfig cfg_;
  std::string config_path_;
  std::string mode_;
  std::string noise_model_;
  std::string schedule_;
  std::string constants_;
  std::vector<std::string> policies_;
  std::vector<std::pair<CLI::Option*, std::function<void(pagd::ExperimentConfig&)>>>
      flags_;
};

void print_summary(const pagd::ExperimentReport& report,
                   const std::vector<std::string>& files) {
  std::cout << "mode " << pagd::to_string(report.config.mode) << ", eta "
            << report.eta << ", avg budget " << report.avg_budget
            << ", power floor " << report.power_floor << ", z0 " << report.z0
            << "\n";
  for (const auto& o : report.outcomes) {
    std::cout << "  " << pagd::to_string(o.policy) << ": mean z_T "
              << o.stats.mean << " +- " << o.stats.std_error << " (n="
              << o.stats.count << "), " << o.bound_name << " bound " << o.bound
              << ", ratio " << o.bound_ratio;
    if (report.config.mode != pagd::ExperimentMode::kSyntheticGlobal) {
      std::cout << ", paths leaving sublevel set " << o.paths_sublevel_violation
                << ", paths exceeding radius " << o.paths_radius_violation;
    }
    std::cout << "\n";
  }
  for (const auto& d : report.paired) {
    std::cout << "  paired " << pagd::to_string(d.policy) << " - "
              << pagd::to_string(d.baseline) << ": " << d.stats.mean << " +- "
              << d.stats.std_error << "\n";
  }
  for (const auto& [policy, slope] : report.slopes) {
    std::cout << "  log-log slope of noise term vs T (" << pagd::to_string(policy)
              << "): " << slope << "\n";
  }
  std::cout << "wrote " << files.size() << " files to " << report.config.output
            << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Power-allocated gradient descent over a noisy analog channel"};
  app.set_version_flag("--version", std::string(pagd::library_version()));
  app.require_subcommand(1);

  // alloc
  CLI::App* alloc = app.add_subcommand("alloc", "print a power schedule as CSV");
  std::string alloc_policy = "ctg";
  std::size_t alloc_T = 20;
  double alloc_mu = 1.0, alloc_eta = 0.1, alloc_budget = 1.0, alloc_floor = 0.0;
  std::vector<double> alloc_weights;
  alloc->add_option("--schedule", alloc_policy, "constant | geometric | ctg");
  alloc->add_option("--T", alloc_T, "horizon");
  alloc->add_option("--mu", alloc_mu, "PL constant");
  alloc->add_option("--eta", alloc_eta, "step size");
  alloc->add_option("--avg-budget", alloc_budget, "average power");
  alloc->add_option("--floor", alloc_floor, "per-iteration power floor");
  alloc->add_option("--weights", alloc_weights,
                    "solve sum a_i/w_i with sum w_i = T * avg-budget instead")
      ->delimiter(',');

  ConfigFlags run_flags, compare_flags;
  CLI::App* run = app.add_subcommand("run", "run one schedule policy");
  run_flags.attach(run);
  CLI::App* compare =
      app.add_subcommand("compare", "compare policies on common random numbers");
  compare_flags.attach(compare);

  CLI::App* solve = app.add_subcommand("lqr-solve", "reference LQR optimum");
  std::string solve_instance, solve_output;
  double solve_margin = 0.1;
  solve->add_option("--instance", solve_instance, "instance JSON")->required();
  solve->add_option("--cap-margin", solve_margin, "cost cap 4 J* (1 + margin)");
  solve->add_option("--output", solve_output, "write JSON here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*alloc) {
      if (!alloc_weights.empty()) {
        pagd::AllocationProblem problem{alloc_weights,
                                        static_cast<double>(alloc_T) * alloc_budget,
                                        alloc_floor};
        const auto sol = pagd::solve_floored_allocation(problem);
        std::cout << "i,a,w\n";
        for (std::size_t i = 0; i < sol.w.size(); ++i) {
          std::cout << i << ',' << alloc_weights[i] << ',' << sol.w[i] << '\n';
        }
        std::cerr << "objective " << sol.objective << ", switch index "
                  << sol.switch_index << "\n";
        return 0;
      }
      pagd::PowerSchedule s;
      switch (pagd::parse_schedule_policy(alloc_policy)) {
        case pagd::SchedulePolicy::kConstant:
          s = pagd::constant_schedule(alloc_T, alloc_budget);
          break;
        case pagd::SchedulePolicy::kGeometric:
          s = pagd::geometric_schedule(alloc_T, alloc_budget, alloc_mu, alloc_eta);
          break;
        case pagd::SchedulePolicy::kCtg:
          s = pagd::ctg_schedule(alloc_T, alloc_budget, alloc_mu, alloc_eta,
                                 alloc_floor);
          break;
      }
      std::cout.precision(17);
      std::cout << "t,sigma_sq\n";
      for (std::size_t t = 0; t < s.sigma_sq.size(); ++t) {
        std::cout << t << ',' << s.sigma_sq[t] << '\n';
      }
      std::cerr << "switch time " << s.t_switch << ", total power "
                << s.total_power() << "\n";
      return 0;
    }
    if (*run || *compare) {
      const pagd::ExperimentConfig cfg =
          (*run ? run_flags : compare_flags).resolve();
      const pagd::ExperimentReport report =
          *run ? pagd::run_experiment(cfg) : pagd::compare_schedules(cfg);
      print_summary(report, pagd::write_report(report, cfg.output));
      return 0;
    }
    if (*solve) {
      const auto inst = pagd::lqr::load_instance(solve_instance);
      const auto ref = pagd::lqr::reference_optimum(inst);
      const auto constants = pagd::lqr::regularity_constants(
          inst, pagd::lqr::default_cost_cap(ref.cost, solve_margin), ref.cost);
      const std::string text =
          pagd::lqr::reference_to_json(ref, constants).dump(2) + "\n";
      if (solve_output.empty()) {
        std::cout << text;
      } else {
        std::ofstream(solve_output) << text;
      }
      for (const auto& w : constants.warnings) std::cerr << "warning: " << w << "\n";
      return 0;
    }
  } catch (const pagd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
