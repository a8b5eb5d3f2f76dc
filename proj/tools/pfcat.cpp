// pfcat: staged N-1 screening and power-flow-controller siting study.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "pfcat/study.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::size_t> workers;
  std::vector<double> voltage_levels;
  std::optional<double> pfc_cap;
  bool screen_from_stage1 = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "study configuration (JSON)")->required();
  cmd->add_option("--out", o.out, "output directory (overrides the config)");
  cmd->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--voltage-levels", o.voltage_levels, "monitored voltage levels in kV")->delimiter(',');
  cmd->add_option("--pfc-cap", o.pfc_cap, "maximum reactance increase in percent");
  cmd->add_flag("--screen-from-stage1", o.screen_from_stage1, "Stage 2 monitors only Stage-1-flagged lines");
}

pfcat::StudyConfig resolve(const Overrides& o) {
  auto c = pfcat::StudyConfig::load(o.config);
  if (o.out) c.output_dir = *o.out;
  if (o.workers) c.workers = *o.workers;
  if (!o.voltage_levels.empty()) c.parameters.voltage_levels_kv = o.voltage_levels;
  if (o.pfc_cap) c.parameters.pfc_cap_pct = *o.pfc_cap;
  if (o.screen_from_stage1) c.parameters.screen_from_stage1 = true;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Year-round N-1 screening and PFC siting on a DC network model"};
  app.require_subcommand(1);
  Overrides o;
  struct Command {
    const char* name;
    const char* help;
    int (pfcat::Study::*run)();
  };
  const Command commands[] = {
      {"dispatch", "hourly merit-order dispatch for the study year", &pfcat::Study::dispatch},
      {"screen", "Stage 1 intact and Stage 2 N-1 overload screening", &pfcat::Study::screen},
      {"site-pfc", "Stage 3 PFC assessment, ranking and report", &pfcat::Study::site_pfc},
      {"report", "rebuild the report from stage outputs", &pfcat::Study::report},
      {"run-all", "dispatch, screen, site-pfc and report in sequence", &pfcat::Study::run_all},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    add_common(sub, o);
    subs.emplace_back(sub, &c);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return pfcat::kExitValidation;
  }

  try {
    pfcat::Study study(resolve(o), std::cout);
    for (const auto& [sub, cmd] : subs)
      if (sub->parsed()) return (study.*(cmd->run))();
  } catch (const std::exception& e) {
    return pfcat::exit_code_for(e, std::cerr);
  }
  return pfcat::kExitFailure;
}
