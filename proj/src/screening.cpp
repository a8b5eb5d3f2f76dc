#include "pfcat/screening.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>

#include "pfcat/csv.hpp"
#include "pfcat/errors.hpp"
#include "pfcat/parallel.hpp"

namespace pfcat {
namespace {

// Effective ratings of the monitored lines, per season.
struct RatingTable {
  std::vector<double> summer;
  std::vector<double> winter;

  RatingTable(const NetworkModel& model, std::span<const LineIndex> lines, const SeasonCalendar& calendar) {
    const double keep = 1.0 - calendar.derate_factor();
    for (LineIndex l : lines) {
      summer.push_back(model.lines()[l].rating_summer_mw * keep);
      winter.push_back(model.lines()[l].rating_winter_mw * keep);
    }
  }
  double at(std::size_t i, Season s) const { return s == Season::kSummer ? summer[i] : winter[i]; }
};

void emit(std::vector<OverloadRecord>& out, LineIndex line, int hour, std::optional<LineIndex> contingency,
          double flow_mw, double rating_mw, const Thresholds& t) {
  const double loading = 100.0 * std::abs(flow_mw) / rating_mw;
  const auto cls = classify_loading(loading, t);
  if (!cls) return;
  const double excess =
      *cls == OverloadClass::kOverload ? std::abs(flow_mw) - rating_mw * t.overload_pct / 100.0 : 0.0;
  out.push_back(OverloadRecord{line, hour, contingency, loading, excess, *cls});
}

template <typename PerChunk>
std::vector<OverloadRecord> gather(std::size_t n, std::size_t workers, PerChunk&& body) {
  std::vector<std::vector<OverloadRecord>> parts(chunk_count(n, workers));
  parallel_chunks(n, workers, [&](std::size_t c, std::size_t begin, std::size_t end) {
    body(parts[c], begin, end);
  });
  std::vector<OverloadRecord> out;
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace

std::string_view to_string(OverloadClass c) { return c == OverloadClass::kOverload ? "overload" : "near"; }

std::optional<OverloadClass> classify_loading(double loading_pct, const Thresholds& t) {
  if (loading_pct > t.overload_pct) return OverloadClass::kOverload;
  if (loading_pct > t.near_pct) return OverloadClass::kNear;
  return std::nullopt;
}

bool record_order(const OverloadRecord& a, const OverloadRecord& b) {
  if (a.hour != b.hour) return a.hour < b.hour;
  if (a.contingency != b.contingency) {
    if (!a.contingency) return true;
    if (!b.contingency) return false;
    return *a.contingency < *b.contingency;
  }
  return a.line < b.line;
}

void sort_records(std::vector<OverloadRecord>& records) {
  std::stable_sort(records.begin(), records.end(), record_order);
}

std::optional<Eigen::Index> YearFlows::column_of(int hour) const {
  auto it = std::lower_bound(hours.begin(), hours.end(), hour);
  if (it == hours.end() || *it != hour) return std::nullopt;
  return static_cast<Eigen::Index>(it - hours.begin());
}

Stage1Result stage1_scan(const DispatchYear& year, const DemandProfile& profile, const NetworkModel& model,
                         const SusceptanceSystem<double>& system, const SeasonCalendar& calendar,
                         const ScreeningOptions& options) {
  Stage1Result res;
  auto& yf = res.flows;
  yf.topology = system.fingerprint();
  for (const auto& h : year.hours) (h.feasible ? yf.hours : yf.excluded_hours).push_back(h.hour);
  std::sort(yf.hours.begin(), yf.hours.end());

  const auto n_hours = static_cast<Eigen::Index>(yf.hours.size());
  yf.injections_mw.resize(static_cast<Eigen::Index>(model.bus_count()), n_hours);
  yf.flows_mw.resize(static_cast<Eigen::Index>(model.line_count()), n_hours);
  const RatingTable ratings(model, options.monitored, calendar);

  res.records = gather(yf.hours.size(), options.workers,
                       [&](std::vector<OverloadRecord>& out, std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      const int hour = yf.hours[c];
      const auto col = static_cast<Eigen::Index>(c);
      const Eigen::VectorXd inj = bus_injections(model, year.hours.at(static_cast<std::size_t>(hour)), profile);
      FlowSolution<double> sol;
      try {
        sol = solve_flows(system, inj);
      } catch (const SolverError& e) {
        throw SolverError("hour " + std::to_string(hour) + ": " + e.what());
      }
      yf.injections_mw.col(col) = inj;
      yf.flows_mw.col(col) = sol.flows_mw;
      const Season season = calendar.season(hour);
      for (std::size_t i = 0; i < options.monitored.size(); ++i) {
        const LineIndex l = options.monitored[i];
        emit(out, l, hour, std::nullopt, sol.flows_mw(static_cast<Eigen::Index>(l)), ratings.at(i, season),
             options.thresholds);
      }
    }
  });
  return res;
}

Stage2Result stage2_scan(const YearFlows& flows, const LodfMatrix<double>& lodf, const NetworkModel& model,
                         const SeasonCalendar& calendar, const ScreeningOptions& options,
                         std::span<const OverloadRecord> stage1_records) {
  if (flows.topology != lodf.topology)
    throw SolverError("shift factors are stale: computed for a different topology than the Stage-1 flows");

  Stage2Result res;
  for (LineIndex k = 0; k < model.line_count(); ++k) {
    if (!lodf.in_service[k]) continue;
    (lodf.islanding[k] ? res.islanding_outages : res.outages).push_back(k);
  }
  if (options.screen_from_stage1) {
    std::set<LineIndex> flagged;
    for (const auto& r : stage1_records) flagged.insert(r.line);
    for (LineIndex l : options.monitored)
      if (flagged.count(l)) res.monitored.push_back(l);
  } else {
    res.monitored = options.monitored;
  }

  const auto n_mon = static_cast<Eigen::Index>(res.monitored.size());
  const auto n_out = static_cast<Eigen::Index>(res.outages.size());
  // LODF restricted to monitored rows x screened outage columns.
  Eigen::MatrixXd factors(n_mon, n_out);
  for (Eigen::Index i = 0; i < n_mon; ++i)
    for (Eigen::Index j = 0; j < n_out; ++j)
      factors(i, j) = lodf(res.monitored[static_cast<std::size_t>(i)], res.outages[static_cast<std::size_t>(j)]);
  const RatingTable ratings(model, res.monitored, calendar);

  res.records = gather(flows.hours.size(), options.workers,
                       [&](std::vector<OverloadRecord>& out, std::size_t begin, std::size_t end) {
    Eigen::VectorXd base_mon(n_mon), post(n_mon);
    for (std::size_t c = begin; c < end; ++c) {
      const int hour = flows.hours[c];
      const auto col = static_cast<Eigen::Index>(c);
      const Season season = calendar.season(hour);
      for (Eigen::Index i = 0; i < n_mon; ++i)
        base_mon(i) = flows.flows_mw(static_cast<Eigen::Index>(res.monitored[static_cast<std::size_t>(i)]), col);
      for (Eigen::Index j = 0; j < n_out; ++j) {
        const LineIndex k = res.outages[static_cast<std::size_t>(j)];
        const double fk = flows.flows_mw(static_cast<Eigen::Index>(k), col);
        post.noalias() = base_mon + factors.col(j) * fk;
        for (Eigen::Index i = 0; i < n_mon; ++i) {
          const LineIndex l = res.monitored[static_cast<std::size_t>(i)];
          if (l == k) continue;
          emit(out, l, hour, k, post(i), ratings.at(static_cast<std::size_t>(i), season), options.thresholds);
        }
      }
    }
  });
  return res;
}

const LineSummary* ScreeningSummary::find(LineIndex line) const {
  auto it = std::lower_bound(lines.begin(), lines.end(), line,
                             [](const LineSummary& s, LineIndex l) { return s.line < l; });
  return it != lines.end() && it->line == line ? &*it : nullptr;
}

int ScreeningSummary::overloaded_line_count() const {
  return static_cast<int>(std::count_if(lines.begin(), lines.end(),
                                        [](const LineSummary& s) { return s.overload_hours > 0; }));
}

ScreeningSummary summarize(std::span<const OverloadRecord> records, const NetworkModel& model) {
  struct Acc {
    std::map<int, double> overload_hour_excess;  // hour -> worst excess
    std::set<int> near_hours;
    std::set<LineIndex> contingencies;
    double max_loading = 0.0;
  };
  std::map<LineIndex, Acc> acc;
  for (const auto& r : records) {
    if (r.line >= model.line_count()) throw Error("record references unknown line index");
    auto& a = acc[r.line];
    a.max_loading = std::max(a.max_loading, r.loading_pct);
    if (r.cls == OverloadClass::kOverload) {
      auto [it, inserted] = a.overload_hour_excess.emplace(r.hour, r.excess_mw);
      if (!inserted) it->second = std::max(it->second, r.excess_mw);
      if (r.contingency) a.contingencies.insert(*r.contingency);
    } else {
      a.near_hours.insert(r.hour);
    }
  }

  ScreeningSummary out;
  std::map<std::string, RegionSummary> regions;
  for (const auto& [line, a] : acc) {
    LineSummary s;
    s.line = line;
    s.region = model.line_region(line);
    s.overload_hours = static_cast<int>(a.overload_hour_excess.size());
    for (int h : a.near_hours)
      if (!a.overload_hour_excess.count(h)) ++s.near_hours;
    s.max_loading_pct = a.max_loading;
    for (const auto& [h, e] : a.overload_hour_excess) s.overload_energy_mwh += e;
    s.contingency_count = static_cast<int>(a.contingencies.size());
    auto& reg = regions[s.region];
    reg.region = s.region;
    (s.overload_hours > 0 ? reg.overloaded_lines : reg.near_lines) += 1;
    out.lines.push_back(std::move(s));
  }
  for (auto& [name, r] : regions) out.regions.push_back(std::move(r));
  return out;
}

void write_overloads_csv(std::ostream& out, std::span<const OverloadRecord> records, const NetworkModel& model) {
  csv::write_row(out, {"line", "hour", "contingency", "loading_pct", "excess_mw", "class"});
  for (const auto& r : records)
    csv::write_row(out, {model.lines()[r.line].id, std::to_string(r.hour),
                         r.contingency ? model.lines()[*r.contingency].id : std::string(),
                         csv::format_number(r.loading_pct), csv::format_number(r.excess_mw),
                         std::string(to_string(r.cls))});
}

std::vector<OverloadRecord> read_overloads_csv(const std::filesystem::path& path, const NetworkModel& model) {
  const auto t = csv::Table::read(path);
  t.require_header({"line", "hour", "contingency", "loading_pct", "excess_mw", "class"});
  std::vector<OverloadRecord> out;
  out.reserve(t.rows().size());
  auto line_of = [&](const csv::Row& r, std::size_t col) {
    const auto l = model.find_line(t.text(r, col));
    if (!l) throw ParseError(t.source(), r.line, "unknown line '" + t.text(r, col) + "'");
    return *l;
  };
  for (const auto& r : t.rows()) {
    OverloadRecord rec;
    rec.line = line_of(r, 0);
    rec.hour = static_cast<int>(t.integer(r, 1));
    if (rec.hour < 0 || rec.hour >= kHoursPerYear) throw ParseError(t.source(), r.line, "hour outside [0, 8760)");
    if (!t.text(r, 2).empty()) rec.contingency = line_of(r, 2);
    rec.loading_pct = t.number(r, 3);
    rec.excess_mw = t.number(r, 4);
    const auto& cls = t.text(r, 5);
    if (cls == "overload") rec.cls = OverloadClass::kOverload;
    else if (cls == "near") rec.cls = OverloadClass::kNear;
    else throw ParseError(t.source(), r.line, "class must be overload or near");
    out.push_back(rec);
  }
  return out;
}

void write_line_summary_csv(std::ostream& out, const ScreeningSummary& summary, const NetworkModel& model) {
  csv::write_row(out, {"line", "region", "overload_hours", "near_hours", "max_loading_pct",
                       "overload_energy_mwh", "contingency_count"});
  for (const auto& s : summary.lines)
    csv::write_row(out, {model.lines()[s.line].id, s.region, std::to_string(s.overload_hours),
                         std::to_string(s.near_hours), csv::format_number(s.max_loading_pct),
                         csv::format_number(s.overload_energy_mwh), std::to_string(s.contingency_count)});
}

void write_region_summary_csv(std::ostream& out, const ScreeningSummary& summary) {
  csv::write_row(out, {"region", "overloaded_lines", "near_lines"});
  for (const auto& r : summary.regions)
    csv::write_row(out, {r.region, std::to_string(r.overloaded_lines), std::to_string(r.near_lines)});
}

void write_duration_histogram_csv(std::ostream& out, const ScreeningSummary& summary, const NetworkModel& model) {
  std::vector<const LineSummary*> rows;
  for (const auto& s : summary.lines) rows.push_back(&s);
  std::stable_sort(rows.begin(), rows.end(), [](const LineSummary* a, const LineSummary* b) {
    return a->overload_hours > b->overload_hours;
  });
  csv::write_row(out, {"line", "region", "overload_hours", "near_hours"});
  for (const auto* s : rows)
    csv::write_row(out, {model.lines()[s->line].id, s->region, std::to_string(s->overload_hours),
                         std::to_string(s->near_hours)});
}

void write_severity_csv(std::ostream& out, const ScreeningSummary& summary, const NetworkModel& model) {
  std::vector<const LineSummary*> rows;
  for (const auto& s : summary.lines) rows.push_back(&s);
  std::stable_sort(rows.begin(), rows.end(), [](const LineSummary* a, const LineSummary* b) {
    return a->max_loading_pct > b->max_loading_pct;
  });
  csv::write_row(out, {"line", "region", "max_loading_pct", "overload_energy_mwh", "overload_hours",
                       "contingency_count"});
  for (const auto* s : rows)
    csv::write_row(out, {model.lines()[s->line].id, s->region, csv::format_number(s->max_loading_pct),
                         csv::format_number(s->overload_energy_mwh), std::to_string(s->overload_hours),
                         std::to_string(s->contingency_count)});
}

}  // namespace pfcat
