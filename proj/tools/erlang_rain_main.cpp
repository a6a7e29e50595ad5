// Command-line front end: erlang_rain [options] prec|policy|cost|validate|config

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "erlang_rain/commands.hpp"

using namespace erlang_rain;

namespace {

enum Exit { kOk = 0, kUsage = 1, kInfeasible = 2, kValidation = 3 };

void write_file(const Scenario& s, const std::string& name, const CsvTable& table) {
  std::filesystem::create_directories(s.output_dir);
  const std::filesystem::path path = std::filesystem::path(s.output_dir) / name;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_csv(out, s, table);
  std::cout << "wrote " << path.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Erlang loss model of a transmit-only sensor network: reception, admission policies, cost, simulation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string profile;
  std::string output_dir;
  std::vector<std::string> sets;
  app.add_option("-c,--config", config_path, "scenario file")->check(CLI::ExistingFile);
  app.add_option("-p,--profile", profile, "named profile (canonical)");
  app.add_option("-o,--output-dir", output_dir, "directory for CSV outputs");
  app.add_option("-s,--set", sets, "override a key: section.key=value (repeatable)");

  app.add_subcommand("prec", "reception probability and its bounds over the radius grid");
  CLI::App* policy_cmd = app.add_subcommand("policy", "solve an admission policy and its density profile");
  std::string kind;
  policy_cmd->add_option("kind", kind, "naive | maxmin | waterfill | cod")
      ->required()
      ->check(CLI::IsMember({"naive", "maxmin", "waterfill", "cod"}));
  app.add_subcommand("cost", "deployment cost sweep and gain versus the price ratio");
  CLI::App* validate_cmd = app.add_subcommand("validate", "compare the closed forms with simulation");
  int replications = 0;
  bool self_test = false;
  validate_cmd->add_option("-r,--replications", replications, "independent runs (default sim.replications)");
  validate_cmd->add_flag("--self-test", self_test, "perturb gamma on the analytic side; must fail");
  app.add_subcommand("config", "print the resolved scenario");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    ConfigDoc overrides;
    if (const char* env = std::getenv("ERLANG_RAIN_SEED"); env && *env)
      apply_assignment(overrides, std::string("sim.seed=") + env);
    if (!profile.empty()) overrides[""]["profile"] = ConfigValue::string(profile);
    if (!output_dir.empty()) overrides[""]["output_dir"] = ConfigValue::string(output_dir);
    for (const std::string& a : sets) apply_assignment(overrides, a);
    const Scenario s =
        resolve_scenario(config_path.empty() ? std::nullopt : std::optional<std::string>(config_path), overrides);

    if (app.got_subcommand("config")) {
      std::cout << serialize_scenario(s);
    } else if (app.got_subcommand("prec")) {
      write_file(s, "prec.csv", cmd_prec(s));
    } else if (app.got_subcommand("policy")) {
      const PolicyOutput out = cmd_policy(s, kind);
      write_file(s, "policy_" + kind + ".csv", out.policy);
      write_file(s, "rho_" + kind + ".csv", out.profile);
      std::cout << out.summary << '\n';
    } else if (app.got_subcommand("cost")) {
      const CostOutput out = cmd_cost(s);
      write_file(s, "cost_sweep.csv", out.sweep);
      write_file(s, "cost_gain.csv", out.gains);
    } else if (app.got_subcommand("validate")) {
      const int reps = replications > 0 ? replications : static_cast<int>(s.sim.replications);
      const ValidationReport r = cmd_validate(s, reps, self_test);
      write_report(std::cout, r);
      return r.passed ? kOk : kValidation;
    }
    return kOk;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
}
