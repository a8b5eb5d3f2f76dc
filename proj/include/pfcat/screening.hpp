#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pfcat/dcpf.hpp"
#include "pfcat/dispatch.hpp"
#include "pfcat/network.hpp"
#include "pfcat/shift_factors.hpp"

namespace pfcat {

enum class OverloadClass { kNear, kOverload };

std::string_view to_string(OverloadClass c);

/// Loading thresholds in percent of effective rating. A record is emitted
/// for loading > near_pct; it is an overload for loading > overload_pct and
/// "near" on (near_pct, overload_pct].
struct Thresholds {
  double near_pct = 90.0;
  double overload_pct = 100.0;
};

std::optional<OverloadClass> classify_loading(double loading_pct, const Thresholds& thresholds);

struct OverloadRecord {
  LineIndex line = 0;
  int hour = 0;
  std::optional<LineIndex> contingency;  // empty for the intact network
  double loading_pct = 0.0;
  double excess_mw = 0.0;  // MW above the overload limit, 0 for near records
  OverloadClass cls = OverloadClass::kNear;

  bool operator==(const OverloadRecord&) const = default;
};

/// Record order used everywhere: hour, then contingency (intact first, then
/// by line index), then monitored line index.
bool record_order(const OverloadRecord& a, const OverloadRecord& b);
void sort_records(std::vector<OverloadRecord>& records);

/// Intact-network injections and flows for every analysed hour.
struct YearFlows {
  std::vector<int> hours;           // feasible hours, ascending
  std::vector<int> excluded_hours;  // infeasible dispatch hours
  Eigen::MatrixXd injections_mw;    // buses x hours
  Eigen::MatrixXd flows_mw;         // lines x hours
  std::uint64_t topology = 0;

  std::optional<Eigen::Index> column_of(int hour) const;
};

struct ScreeningOptions {
  Thresholds thresholds;
  std::vector<LineIndex> monitored;  // usually filter_monitored_lines()
  std::size_t workers = 1;
  bool screen_from_stage1 = false;   // Stage 2 monitors only Stage-1-flagged lines
};

struct Stage1Result {
  std::vector<OverloadRecord> records;
  YearFlows flows;
};

/// One DC solve per feasible hour against a shared factorization.
Stage1Result stage1_scan(const DispatchYear& year, const DemandProfile& profile, const NetworkModel& model,
                         const SusceptanceSystem<double>& system, const SeasonCalendar& calendar,
                         const ScreeningOptions& options);

struct Stage2Result {
  std::vector<OverloadRecord> records;
  std::vector<LineIndex> outages;             // screened contingencies
  std::vector<LineIndex> islanding_outages;   // skipped
  std::vector<LineIndex> monitored;
};

/// Every hour x non-islanding outage through the LODF superposition. Throws
/// SolverError if the factors were computed for a different topology than
/// the Stage-1 flows.
Stage2Result stage2_scan(const YearFlows& flows, const LodfMatrix<double>& lodf, const NetworkModel& model,
                         const SeasonCalendar& calendar, const ScreeningOptions& options,
                         std::span<const OverloadRecord> stage1_records = {});

struct LineSummary {
  LineIndex line = 0;
  int overload_hours = 0;           // distinct hours with an overload record
  int near_hours = 0;               // distinct hours with near records only
  double max_loading_pct = 0.0;
  double overload_energy_mwh = 0.0; // per overloaded hour, the worst excess
  int contingency_count = 0;        // distinct outages causing an overload
  std::string region;
};

struct RegionSummary {
  std::string region;
  int overloaded_lines = 0;
  int near_lines = 0;  // flagged lines with no overload hour
};

struct ScreeningSummary {
  std::vector<LineSummary> lines;      // flagged lines, by line index
  std::vector<RegionSummary> regions;  // regions with a flagged line, by name

  const LineSummary* find(LineIndex line) const;
  int overloaded_line_count() const;
};

ScreeningSummary summarize(std::span<const OverloadRecord> records, const NetworkModel& model);

// Workbook files.
void write_overloads_csv(std::ostream& out, std::span<const OverloadRecord> records, const NetworkModel& model);
std::vector<OverloadRecord> read_overloads_csv(const std::filesystem::path& path, const NetworkModel& model);
void write_line_summary_csv(std::ostream& out, const ScreeningSummary& summary, const NetworkModel& model);
void write_region_summary_csv(std::ostream& out, const ScreeningSummary& summary);
void write_duration_histogram_csv(std::ostream& out, const ScreeningSummary& summary, const NetworkModel& model);
void write_severity_csv(std::ostream& out, const ScreeningSummary& summary, const NetworkModel& model);

}  // namespace pfcat
