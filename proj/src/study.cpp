#include "pfcat/study.hpp"

#include <json.hpp>

#include <fstream>
#include <ostream>
#include <sstream>

#include "pfcat/csv.hpp"
#include "pfcat/dcpf.hpp"
#include "pfcat/dispatch.hpp"
#include "pfcat/errors.hpp"
#include "pfcat/hash.hpp"
#include "pfcat/network.hpp"
#include "pfcat/pfc_siting.hpp"
#include "pfcat/screening.hpp"
#include "pfcat/shift_factors.hpp"

namespace pfcat {
namespace {

using Json = nlohmann::json;
using Kind = ValidationError::Kind;

[[noreturn]] void invalid(const std::string& what) { throw ValidationError(Kind::kInvalidValue, what); }

template <typename T>
T get(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    invalid(std::string("config: '") + key + "' has the wrong type");
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error("cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.close();
  if (!out) throw Error("cannot write " + path.string());
}

template <typename Fn>
void write_csv(const std::filesystem::path& path, Fn&& fn) {
  std::ostringstream ss;
  fn(ss);
  write_text(path, ss.str());
}

std::optional<Json> read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

std::string cached_key(const std::filesystem::path& summary) {
  const auto j = read_json(summary);
  return j && j->contains("cache_key") && (*j)["cache_key"].is_string() ? (*j)["cache_key"].get<std::string>() : "";
}

std::string file_digest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw ValidationError(Kind::kMissingInput, "input file not found: " + path.string(), {path.string()});
  return sha256_file(path);
}

std::string numbers(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += csv::format_number(x) + ",";
  return s;
}

}  // namespace

StudyConfig StudyConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ValidationError(Kind::kMissingInput, "cannot read config file " + path.string(), {path.string()});
  std::ostringstream ss;
  ss << in.rdbuf();
  auto base = path.parent_path();
  if (base.empty()) base = ".";
  return from_json_text(ss.str(), base);
}

StudyConfig StudyConfig::from_json_text(const std::string& text, const std::filesystem::path& base_dir) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    invalid(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) invalid("config must be a JSON object");

  static const std::vector<std::string> known = {
      "scenario", "network", "demand", "bus_shares", "res_availability", "slack_bus", "system_base_mva",
      "voltage_levels_kv", "snsp_cap", "rating_derate", "near_threshold_pct", "overload_threshold_pct",
      "pfc_cap_pct", "bisection_tolerance_pct", "summer_months", "workers", "output_dir", "screen_from_stage1",
      "report_formats"};
  for (const auto& [key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end()) invalid("config: unknown key '" + key + "'");

  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base_dir / fp;
  };

  StudyConfig c;
  if (j.contains("scenario")) c.scenario = get<std::string>(j, "scenario");
  if (!j.contains("network")) invalid("config: 'network' is required");
  const auto& net = j["network"];
  for (const char* k : {"buses", "lines", "generators"})
    if (!net.is_object() || !net.contains(k)) invalid(std::string("config: 'network.") + k + "' is required");
  c.buses = resolve(get<std::string>(net, "buses"));
  c.lines = resolve(get<std::string>(net, "lines"));
  c.generators = resolve(get<std::string>(net, "generators"));
  for (const char* k : {"demand", "bus_shares"})
    if (!j.contains(k)) invalid(std::string("config: '") + k + "' is required");
  c.demand = resolve(get<std::string>(j, "demand"));
  c.bus_shares = resolve(get<std::string>(j, "bus_shares"));
  if (j.contains("res_availability")) c.res_availability = resolve(get<std::string>(j, "res_availability"));
  if (j.contains("slack_bus")) c.slack_bus = get<std::string>(j, "slack_bus");
  if (j.contains("system_base_mva")) c.system_base_mva = get<double>(j, "system_base_mva");

  auto& p = c.parameters;
  if (j.contains("voltage_levels_kv")) p.voltage_levels_kv = get<std::vector<double>>(j, "voltage_levels_kv");
  if (j.contains("snsp_cap")) p.snsp_cap = get<double>(j, "snsp_cap");
  if (j.contains("rating_derate")) p.derate = get<double>(j, "rating_derate");
  if (j.contains("near_threshold_pct")) p.near_pct = get<double>(j, "near_threshold_pct");
  if (j.contains("overload_threshold_pct")) p.overload_pct = get<double>(j, "overload_threshold_pct");
  if (j.contains("pfc_cap_pct")) p.pfc_cap_pct = get<double>(j, "pfc_cap_pct");
  if (j.contains("bisection_tolerance_pct")) p.tolerance_pct = get<double>(j, "bisection_tolerance_pct");
  if (j.contains("summer_months")) p.summer_months = get<std::vector<int>>(j, "summer_months");
  if (j.contains("screen_from_stage1")) p.screen_from_stage1 = get<bool>(j, "screen_from_stage1");
  if (j.contains("workers")) {
    const auto w = get<long>(j, "workers");
    if (w < 1) invalid("config: 'workers' must be >= 1");
    c.workers = static_cast<std::size_t>(w);
  }
  if (j.contains("output_dir")) c.output_dir = resolve(get<std::string>(j, "output_dir"));
  else c.output_dir = base_dir / "out";
  if (j.contains("report_formats")) c.report_formats = get<std::string>(j, "report_formats");
  c.validate();
  return c;
}

void StudyConfig::validate() const {
  const auto& p = parameters;
  if (!(p.near_pct > 0.0 && p.near_pct < p.overload_pct))
    invalid("thresholds must satisfy 0 < near < overload (near " + csv::format_number(p.near_pct) + ", overload " +
            csv::format_number(p.overload_pct) + ")");
  if (!(p.pfc_cap_pct > 0.0 && p.pfc_cap_pct <= 100.0))
    invalid("PFC cap must lie in (0, 100], got " + csv::format_number(p.pfc_cap_pct));
  if (!(p.tolerance_pct > 0.0 && p.tolerance_pct <= p.pfc_cap_pct))
    invalid("bisection tolerance must lie in (0, cap]");
  if (!(p.snsp_cap >= 0.0 && p.snsp_cap <= 1.0)) invalid("snsp_cap must lie in [0, 1]");
  if (!(p.derate >= 0.0 && p.derate < 1.0)) invalid("rating derate must lie in [0, 1)");
  if (p.voltage_levels_kv.empty()) invalid("at least one monitored voltage level is required");
  for (int m : p.summer_months)
    if (m < 1 || m > 12) invalid("summer months must be 1..12");
  if (!(system_base_mva > 0.0)) invalid("system base must be positive");
  if (workers < 1) invalid("workers must be >= 1");
  try {
    (void)ReportFormats::parse(report_formats);
  } catch (const std::invalid_argument& e) {
    invalid(e.what());
  }
}

struct Study::Inputs {
  NetworkModel model;
  DemandProfile profile;
  ResAvailability availability;
  SeasonCalendar calendar;
  std::vector<LineIndex> monitored;
  std::optional<DispatchYear> year;
};

Study::Study(StudyConfig config, std::ostream& log) : config_(std::move(config)), log_(log) { config_.validate(); }
Study::~Study() = default;

Study::Inputs& Study::inputs() {
  if (!inputs_) {
    auto model = load_network({config_.buses, config_.lines, config_.generators}, config_.slack_bus,
                              config_.system_base_mva);
    auto profile = DemandProfile::load(config_.demand, config_.bus_shares, model);
    auto avail = config_.res_availability ? ResAvailability::load(*config_.res_availability, model)
                                          : ResAvailability::none(model);
    auto calendar = SeasonCalendar::from_summer_months(config_.parameters.summer_months, config_.parameters.derate);
    auto monitored = filter_monitored_lines(model, config_.parameters.voltage_levels_kv);
    inputs_ = std::make_unique<Inputs>(Inputs{std::move(model), std::move(profile), std::move(avail),
                                              std::move(calendar), std::move(monitored), std::nullopt});
  }
  return *inputs_;
}

std::string Study::dispatch_key() {
  Sha256 h;
  h.update("dispatch-v1\n");
  for (const auto* p : {&config_.buses, &config_.lines, &config_.generators, &config_.demand, &config_.bus_shares})
    h.update(file_digest(*p)).update("\n");
  h.update(config_.res_availability ? file_digest(*config_.res_availability) : "none").update("\n");
  h.update(config_.scenario + "\n" + config_.slack_bus.value_or("") + "\n");
  h.update(csv::format_number(config_.system_base_mva) + "\n" + csv::format_number(config_.parameters.snsp_cap));
  return h.hex_digest();
}

std::string Study::screen_key() {
  const auto& p = config_.parameters;
  Sha256 h;
  h.update("screen-v1\n").update(dispatch_key()).update("\n");
  h.update(numbers(p.voltage_levels_kv) + "\n" + csv::format_number(p.derate) + "\n");
  h.update(csv::format_number(p.near_pct) + "," + csv::format_number(p.overload_pct) + "\n");
  for (int m : p.summer_months) h.update(std::to_string(m) + ",");
  h.update(p.screen_from_stage1 ? "\nstage1-only" : "\nall-lines");
  return h.hex_digest();
}

std::string Study::config_hash() {
  const auto& p = config_.parameters;
  Sha256 h;
  h.update("study-v1\n").update(screen_key()).update("\n");
  h.update(csv::format_number(p.pfc_cap_pct) + "," + csv::format_number(p.tolerance_pct));
  return h.hex_digest();
}

void Study::ensure_dispatch() {
  auto& in = inputs();
  if (in.year) return;
  const auto dir = stage_dir("dispatch");
  const auto key = dispatch_key();
  if (cached_key(dir / "dispatch_summary.json") == key && std::filesystem::exists(dir / "dispatch.csv")) {
    in.year = read_dispatch(dir, in.model, in.profile);
    in.year->scenario = config_.scenario;
    log_ << "dispatch: reusing cached result in " << dir.string() << "\n";
    return;
  }
  ++dispatch_runs_;
  in.year = run_year(in.model, in.profile, in.availability, config_.parameters.snsp_cap, config_.workers,
                     config_.scenario);
  write_dispatch(*in.year, in.model, dir, key);
  log_ << "dispatch: " << in.year->hours.size() << " hours written to " << dir.string() << "\n";
}

int Study::dispatch() {
  ensure_dispatch();
  const auto infeasible = inputs().year->infeasible_hours();
  if (infeasible.empty()) return kExitOk;
  log_ << "dispatch: " << infeasible.size() << " infeasible hour(s), first at hour " << infeasible.front()
       << "; see dispatch_summary.json\n";
  return kExitInfeasible;
}

void Study::ensure_screen() {
  ensure_dispatch();
  const auto dir = stage_dir("screen");
  const auto key = screen_key();
  if (cached_key(dir / "screen_summary.json") == key && std::filesystem::exists(dir / "overloads.csv")) {
    log_ << "screen: reusing cached result in " << dir.string() << "\n";
    return;
  }
  ++screen_runs_;
  auto& in = inputs();
  ScreeningOptions opt;
  opt.thresholds = {config_.parameters.near_pct, config_.parameters.overload_pct};
  opt.monitored = in.monitored;
  opt.workers = config_.workers;
  opt.screen_from_stage1 = config_.parameters.screen_from_stage1;

  const auto system = build_system(in.model);
  auto s1 = stage1_scan(*in.year, in.profile, in.model, system, in.calendar, opt);
  const auto factors = compute_shift_factors(system, in.model);
  auto s2 = stage2_scan(s1.flows, factors.lodf, in.model, in.calendar, opt, s1.records);

  std::vector<OverloadRecord> records = std::move(s1.records);
  records.insert(records.end(), s2.records.begin(), s2.records.end());
  sort_records(records);
  const auto summary = summarize(records, in.model);

  write_csv(dir / "overloads.csv", [&](std::ostream& o) { write_overloads_csv(o, records, in.model); });
  write_csv(dir / "line_summary.csv", [&](std::ostream& o) { write_line_summary_csv(o, summary, in.model); });
  write_csv(dir / "region_summary.csv", [&](std::ostream& o) { write_region_summary_csv(o, summary); });
  write_csv(dir / "duration_histogram.csv",
            [&](std::ostream& o) { write_duration_histogram_csv(o, summary, in.model); });
  write_csv(dir / "severity.csv", [&](std::ostream& o) { write_severity_csv(o, summary, in.model); });

  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["analysed_hours"] = s1.flows.hours.size();
  j["excluded_hours"] = s1.flows.excluded_hours;
  j["monitored_lines"] = s2.monitored.size();
  j["outages_screened"] = s2.outages.size();
  j["islanding_outages"] = s2.islanding_outages.size();
  j["cache_key"] = key;
  write_text(dir / "screen_summary.json", j.dump(2) + "\n");
  log_ << "screen: " << records.size() << " records for " << s1.flows.hours.size() << " hours x "
       << s2.outages.size() << " outages written to " << dir.string() << "\n";
}

int Study::screen() {
  ensure_screen();
  auto& in = inputs();
  const auto records = read_overloads_csv(stage_dir("screen") / "overloads.csv", in.model);
  const auto summary = summarize(records, in.model);
  log_ << "overloaded lines by region:\n";
  if (summary.regions.empty()) log_ << "  (none)\n";
  for (const auto& r : summary.regions)
    log_ << "  " << r.region << ": " << r.overloaded_lines << " overloaded, " << r.near_lines << " near\n";
  return kExitOk;
}

int Study::site_pfc() {
  ensure_screen();
  auto& in = inputs();
  const auto records = read_overloads_csv(stage_dir("screen") / "overloads.csv", in.model);

  const auto system = build_system(in.model);
  ScreeningOptions opt;
  opt.monitored = in.monitored;
  opt.workers = config_.workers;
  const auto s1 = stage1_scan(*in.year, in.profile, in.model, system, in.calendar, opt);
  const auto factors = compute_shift_factors(system, in.model);

  PfcOptions popt;
  popt.cap_pct = config_.parameters.pfc_cap_pct;
  popt.tolerance_pct = config_.parameters.tolerance_pct;
  popt.thresholds = {config_.parameters.near_pct, config_.parameters.overload_pct};
  popt.workers = config_.workers;
  const SitingInputs si{in.model, s1.flows, factors.ptdf, factors.lodf, in.calendar};
  const auto outcomes = assess_all(records, si, popt);
  const auto ranking = rank_targets(outcomes, summarize(records, in.model), in.model);

  const auto dir = stage_dir("pfc");
  write_csv(dir / "pfc_outcomes.csv", [&](std::ostream& o) { write_pfc_outcomes_csv(o, outcomes, in.model); });
  write_csv(dir / "pfc_ranking.csv", [&](std::ostream& o) { write_pfc_ranking_csv(o, ranking, in.model); });
  write_csv(dir / "pfc_adaptive.csv", [&](std::ostream& o) { write_pfc_adaptive_csv(o, outcomes, in.model); });
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["screen_key"] = screen_key();
  j["pfc_cap_pct"] = popt.cap_pct;
  j["bisection_tolerance_pct"] = popt.tolerance_pct;
  j["targets"] = outcomes.size();
  write_text(dir / "pfc_summary.json", j.dump(2) + "\n");
  log_ << "site-pfc: " << outcomes.size() << " target line(s) assessed\n";
  for (const auto& o : outcomes)
    log_ << "  " << in.model.lines()[o.target].id << ": " << to_string(o.cls) << "\n";
  return report();
}

int Study::report() {
  auto& in = inputs();
  const auto pfc_dir = stage_dir("pfc");
  const auto pfc_summary = read_json(pfc_dir / "pfc_summary.json");
  if (!pfc_summary || !std::filesystem::exists(pfc_dir / "pfc_outcomes.csv"))
    throw ValidationError(Kind::kMissingInput, "no PFC results in " + pfc_dir.string() + "; run site-pfc first",
                          {(pfc_dir / "pfc_outcomes.csv").string()});
  const auto key = screen_key();
  if (pfc_summary->value("screen_key", "") != key ||
      cached_key(stage_dir("screen") / "screen_summary.json") != key)
    throw ValidationError(Kind::kInvalidValue, "stage outputs in " + config_.output_dir.string() +
                                                   " are stale for this config; run site-pfc again");
  const auto screen_summary = *read_json(stage_dir("screen") / "screen_summary.json");

  const auto records = read_overloads_csv(stage_dir("screen") / "overloads.csv", in.model);
  const auto outcomes = read_pfc_outcomes_csv(pfc_dir / "pfc_outcomes.csv", in.model);
  RunMetadata meta;
  meta.config_hash = config_hash();
  meta.scenario = config_.scenario;
  meta.parameters = config_.parameters;
  meta.parameters.pfc_cap_pct = pfc_summary->value("pfc_cap_pct", config_.parameters.pfc_cap_pct);
  meta.parameters.tolerance_pct = pfc_summary->value("bisection_tolerance_pct", config_.parameters.tolerance_pct);
  meta.analysed_hours = screen_summary.value("analysed_hours", 0);
  meta.excluded_hours = screen_summary.value("excluded_hours", std::vector<int>{});
  meta.outages_screened = screen_summary.value("outages_screened", 0);
  meta.islanding_outages = screen_summary.value("islanding_outages", 0);

  const auto rep = build_report(records, summarize(records, in.model), outcomes, in.model, std::move(meta));
  const auto files = emit(rep, stage_dir("report"), ReportFormats::parse(config_.report_formats));
  log_ << "report: " << files.size() << " file(s) written to " << stage_dir("report").string() << "\n";
  return kExitOk;
}

int Study::run_all() {
  const int code = dispatch();
  screen();
  site_pfc();
  return code;
}

int exit_code_for(const std::exception& e, std::ostream& err) {
  if (const auto* island = dynamic_cast<const IslandingError*>(&e)) {
    err << "solver error: " << island->what() << "\n";
    return kExitSolver;
  }
  if (dynamic_cast<const SolverError*>(&e)) {
    err << "solver error: " << e.what() << "\n";
    return kExitSolver;
  }
  if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
      dynamic_cast<const std::invalid_argument*>(&e)) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  }
  err << "error: " << e.what() << "\n";
  return kExitFailure;
}

}  // namespace pfcat
