#include "pfcat/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "pfcat/csv.hpp"
#include "pfcat/errors.hpp"
#include "pfcat/hash.hpp"

namespace pfcat {
namespace {

using Json = nlohmann::ordered_json;

void tie_out(const StudyReport& r) {
  const auto recomputed = summarize(r.records, *r.model);
  if (recomputed.lines.size() != r.summary.lines.size())
    throw Error("report tie-out: line summary count differs from the records");
  for (std::size_t i = 0; i < recomputed.lines.size(); ++i) {
    const auto& a = recomputed.lines[i];
    const auto& b = r.summary.lines[i];
    if (a.line != b.line || a.overload_hours != b.overload_hours || a.near_hours != b.near_hours ||
        a.contingency_count != b.contingency_count || a.max_loading_pct != b.max_loading_pct ||
        std::abs(a.overload_energy_mwh - b.overload_energy_mwh) > 1e-9 * std::max(1.0, a.overload_energy_mwh))
      throw Error("report tie-out: summary for line " + r.model->lines()[a.line].id + " disagrees with the records");
  }
  int overloaded = 0;
  for (const auto& reg : r.summary.regions) overloaded += reg.overloaded_lines;
  if (overloaded != r.summary.overloaded_line_count())
    throw Error("report tie-out: regional counts do not sum to the overloaded line total");

  const auto targets = overloaded_targets(r.records);
  if (targets.size() != r.outcomes.size())
    throw Error("report tie-out: " + std::to_string(r.outcomes.size()) + " PFC outcomes for " +
                std::to_string(targets.size()) + " overloaded lines");
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto& o = r.outcomes[i];
    const auto* s = r.summary.find(o.target);
    if (o.target != targets[i] || !s || s->overload_hours != o.overload_hours || o.resolved_hours < 0 ||
        o.resolved_hours > o.overload_hours)
      throw Error("report tie-out: PFC outcome for line " + r.model->lines()[o.target].id +
                  " does not match the screening records");
  }
}

std::string line_id(const StudyReport& r, LineIndex l) { return r.model->lines()[l].id; }

Json outcome_json(const StudyReport& r, const PfcOutcome& o) {
  Json j;
  j["target_line"] = line_id(r, o.target);
  j["classification"] = to_string(o.cls);
  j["pfc_line"] = o.pfc_line ? Json(line_id(r, *o.pfc_line)) : Json(nullptr);
  j["delta_pct"] = o.delta_pct ? Json(*o.delta_pct) : Json(nullptr);
  j["overload_hours"] = o.overload_hours;
  j["resolved_hours"] = o.resolved_hours;
  j["resolved_fraction"] = o.resolved_fraction();
  j["residual_max_loading_pct"] = o.residual_max_loading_pct;
  Json side = Json::array();
  for (LineIndex l : o.side_effect_lines) side.push_back(line_id(r, l));
  j["side_effect_lines"] = side;
  return j;
}

Json summary_json(const StudyReport& r) {
  const auto& p = r.meta.parameters;
  Json j;
  j["schema_version"] = 1;
  j["scenario"] = r.meta.scenario;
  j["config_hash"] = r.meta.config_hash;
  j["parameters"] = {{"voltage_levels_kv", p.voltage_levels_kv},
                     {"snsp_cap", p.snsp_cap},
                     {"rating_derate", p.derate},
                     {"near_threshold_pct", p.near_pct},
                     {"overload_threshold_pct", p.overload_pct},
                     {"pfc_cap_pct", p.pfc_cap_pct},
                     {"bisection_tolerance_pct", p.tolerance_pct},
                     {"summer_months", p.summer_months},
                     {"screen_from_stage1", p.screen_from_stage1}};
  j["dispatch"] = {{"analysed_hours", r.meta.analysed_hours},
                   {"excluded_hours", r.meta.excluded_hours.size()},
                   {"excluded_hour_list", r.meta.excluded_hours}};

  int s1_over = 0, s2_over = 0;
  for (const auto& rec : r.records)
    if (rec.cls == OverloadClass::kOverload) (rec.contingency ? s2_over : s1_over) += 1;
  int near_only = 0;
  for (const auto& l : r.summary.lines) near_only += l.overload_hours == 0 ? 1 : 0;
  j["screening"] = {{"stage1_records", r.stage1_records},
                    {"stage1_overload_records", s1_over},
                    {"stage2_records", r.stage2_records},
                    {"stage2_overload_records", s2_over},
                    {"outages_screened", r.meta.outages_screened},
                    {"islanding_outages_skipped", r.meta.islanding_outages},
                    {"flagged_lines", r.summary.lines.size()},
                    {"overloaded_lines", r.summary.overloaded_line_count()},
                    {"near_only_lines", near_only}};

  Json regions = Json::array();
  for (const auto& reg : r.summary.regions)
    regions.push_back({{"region", reg.region}, {"overloaded_lines", reg.overloaded_lines}, {"near_lines", reg.near_lines}});
  j["regions"] = regions;

  Json lines = Json::array();
  for (const auto& s : r.summary.lines)
    lines.push_back({{"line", line_id(r, s.line)},
                     {"region", s.region},
                     {"overload_hours", s.overload_hours},
                     {"near_hours", s.near_hours},
                     {"max_loading_pct", s.max_loading_pct},
                     {"overload_energy_mwh", s.overload_energy_mwh},
                     {"contingency_count", s.contingency_count}});
  j["lines"] = lines;

  const auto& b = r.breakdown;
  Json pfc;
  pfc["targets"] = b.total();
  pfc["breakdown"] = {{"FullyResolved", b.fully_resolved},
                      {"PartiallyResolved", b.partially_resolved},
                      {"NoChange", b.no_change}};
  pfc["breakdown_pct"] = {{"FullyResolved", b.percent(PfcClass::kFullyResolved)},
                          {"PartiallyResolved", b.percent(PfcClass::kPartiallyResolved)},
                          {"NoChange", b.percent(PfcClass::kNoChange)}};
  Json outcomes = Json::array();
  for (const auto& o : r.outcomes) outcomes.push_back(outcome_json(r, o));
  pfc["outcomes"] = outcomes;
  Json ranking = Json::array();
  for (const auto& k : r.ranking) ranking.push_back({{"rank", k.rank}, {"target_line", line_id(r, k.target)}});
  pfc["ranking"] = ranking;
  j["pfc"] = pfc;
  return j;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

class Writer {
 public:
  explicit Writer(std::filesystem::path root) : root_(std::move(root)) {}

  void write(const std::string& rel, const std::string& content) {
    const auto path = root_ / rel;
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error("cannot create " + path.parent_path().string() + ": " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    if (!out) throw Error("cannot write " + path.string());
    written_.push_back(rel);
  }

  template <typename Fn>
  void write_with(const std::string& rel, Fn&& fn) {
    std::ostringstream ss;
    fn(ss);
    write(rel, ss.str());
  }

  std::vector<ManifestEntry> entries() const {
    std::vector<ManifestEntry> out;
    for (const auto& rel : written_)
      out.push_back({rel, sha256_file(root_ / rel), std::filesystem::file_size(root_ / rel)});
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    return out;
  }

 private:
  std::filesystem::path root_;
  std::vector<std::string> written_;
};

std::string generated_at() {
  std::time_t t;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch)
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  else
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

double PfcBreakdown::percent(PfcClass c) const {
  if (total() == 0) return 0.0;
  const int n = c == PfcClass::kFullyResolved ? fully_resolved
                : c == PfcClass::kPartiallyResolved ? partially_resolved : no_change;
  return 100.0 * n / total();
}

StudyReport build_report(std::span<const OverloadRecord> records, const ScreeningSummary& summary,
                         std::span<const PfcOutcome> outcomes, const NetworkModel& model, RunMetadata meta) {
  StudyReport r;
  r.model = &model;
  r.meta = std::move(meta);
  r.records.assign(records.begin(), records.end());
  r.summary = summary;
  r.outcomes.assign(outcomes.begin(), outcomes.end());
  for (const auto& rec : r.records) {
    if (rec.line >= model.line_count() || (rec.contingency && *rec.contingency >= model.line_count()))
      throw Error("report: record references a line outside the model");
    (rec.contingency ? r.stage2_records : r.stage1_records) += 1;
  }
  tie_out(r);
  for (const auto& o : r.outcomes) {
    switch (o.cls) {
      case PfcClass::kFullyResolved: ++r.breakdown.fully_resolved; break;
      case PfcClass::kPartiallyResolved: ++r.breakdown.partially_resolved; break;
      case PfcClass::kNoChange: ++r.breakdown.no_change; break;
    }
  }
  r.ranking = rank_targets(r.outcomes, r.summary, model);
  return r;
}

ReportFormats ReportFormats::parse(std::string_view list) {
  ReportFormats f{false, false, false};
  while (!list.empty()) {
    const auto cut = list.find(',');
    const auto item = list.substr(0, cut);
    if (item == "csv") f.csv = true;
    else if (item == "json") f.json = true;
    else if (item == "svg") f.svg = true;
    else throw std::invalid_argument("unknown report format '" + std::string(item) + "'");
    list = cut == std::string_view::npos ? std::string_view() : list.substr(cut + 1);
  }
  return f;
}

std::string svg_bar_chart(const std::string& title, const std::string& value_label,
                          std::span<const std::pair<std::string, double>> bars) {
  const int bar_h = 18, gap = 6, left = 160, width = 640, top = 40, chart_w = width - left - 80;
  const int height = top + static_cast<int>(bars.size()) * (bar_h + gap) + 40;
  double max_v = 0.0;
  for (const auto& b : bars) max_v = std::max(max_v, b.second);
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<text x=\"10\" y=\"20\" font-size=\"14\">" << xml_escape(title) << "</text>\n";
  int y = top;
  for (const auto& [label, value] : bars) {
    const double w = max_v > 0.0 ? chart_w * value / max_v : 0.0;
    s << "<text x=\"" << left - 8 << "\" y=\"" << y + 13 << "\" text-anchor=\"end\">" << xml_escape(label)
      << "</text>";
    s << "<rect class=\"bar\" x=\"" << left << "\" y=\"" << y << "\" width=\"" << csv::format_fixed(w, 2)
      << "\" height=\"" << bar_h << "\" fill=\"#4477aa\"/>";
    s << "<text x=\"" << csv::format_fixed(left + w + 4, 2) << "\" y=\"" << y + 13 << "\">"
      << csv::format_number(value) << "</text>\n";
    y += bar_h + gap;
  }
  s << "<text x=\"" << left << "\" y=\"" << y + 20 << "\">" << xml_escape(value_label) << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

std::vector<ManifestEntry> emit(const StudyReport& r, const std::filesystem::path& out_dir,
                                const ReportFormats& formats) {
  if (!r.model) throw Error("report has no network model");
  const auto& model = *r.model;
  Writer w(out_dir);

  if (formats.csv) {
    w.write_with("overloads.csv", [&](std::ostream& o) { write_overloads_csv(o, r.records, model); });
    w.write_with("line_summary.csv", [&](std::ostream& o) { write_line_summary_csv(o, r.summary, model); });
    w.write_with("region_summary.csv", [&](std::ostream& o) { write_region_summary_csv(o, r.summary); });
    w.write_with("duration_histogram.csv",
                 [&](std::ostream& o) { write_duration_histogram_csv(o, r.summary, model); });
    w.write_with("severity.csv", [&](std::ostream& o) { write_severity_csv(o, r.summary, model); });
    w.write_with("pfc_outcomes.csv", [&](std::ostream& o) { write_pfc_outcomes_csv(o, r.outcomes, model); });
    w.write_with("pfc_ranking.csv", [&](std::ostream& o) { write_pfc_ranking_csv(o, r.ranking, model); });
    w.write_with("pfc_breakdown.csv", [&](std::ostream& o) {
      csv::write_row(o, {"classification", "targets", "percent"});
      const std::pair<PfcClass, int> rows[] = {{PfcClass::kFullyResolved, r.breakdown.fully_resolved},
                                               {PfcClass::kPartiallyResolved, r.breakdown.partially_resolved},
                                               {PfcClass::kNoChange, r.breakdown.no_change}};
      for (const auto& [c, n] : rows)
        csv::write_row(o, {std::string(to_string(c)), std::to_string(n), csv::format_number(r.breakdown.percent(c))});
    });
  }
  if (formats.json) w.write("summary.json", summary_json(r).dump(2) + "\n");
  if (formats.svg) {
    std::vector<const LineSummary*> rows;
    for (const auto& s : r.summary.lines)
      if (s.overload_hours > 0) rows.push_back(&s);
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto* a, const auto* b) { return a->overload_hours > b->overload_hours; });
    std::vector<std::pair<std::string, double>> bars;
    for (const auto* s : rows) bars.emplace_back(model.lines()[s->line].id, s->overload_hours);
    w.write("charts/overload_duration.svg", svg_bar_chart("Overload duration per line", "hours overloaded", bars));

    std::vector<std::pair<std::string, double>> pfc;
    for (auto c : {PfcClass::kFullyResolved, PfcClass::kPartiallyResolved, PfcClass::kNoChange})
      pfc.emplace_back(std::string(to_string(c)), r.breakdown.percent(c));
    w.write("charts/pfc_resolution.svg", svg_bar_chart("PFC resolution of overloaded lines", "% of targets", pfc));
  }

  auto entries = w.entries();
  Json manifest;
  manifest["schema_version"] = 1;
  manifest["generated_at"] = generated_at();
  Json files = Json::array();
  for (const auto& e : entries) files.push_back({{"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}});
  manifest["files"] = files;
  std::ofstream out(out_dir / "manifest.json", std::ios::binary | std::ios::trunc);
  out << manifest.dump(2) << "\n";
  if (!out) throw Error("cannot write " + (out_dir / "manifest.json").string());
  return entries;
}

}  // namespace pfcat
