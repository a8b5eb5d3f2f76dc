#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pfcat/network.hpp"
#include "pfcat/pfc_siting.hpp"
#include "pfcat/screening.hpp"

namespace pfcat {

/// Parameters echoed into summary.json so every run states what it used.
struct StudyParameters {
  std::vector<double> voltage_levels_kv{110.0};
  double snsp_cap = 0.65;
  double derate = 0.10;
  double near_pct = 90.0;
  double overload_pct = 100.0;
  double pfc_cap_pct = 40.0;
  double tolerance_pct = 0.1;
  std::vector<int> summer_months{4, 5, 6, 7, 8, 9};
  bool screen_from_stage1 = false;
};

struct RunMetadata {
  std::string config_hash;
  std::string scenario;
  StudyParameters parameters;
  int analysed_hours = 0;
  std::vector<int> excluded_hours;
  int outages_screened = 0;
  int islanding_outages = 0;
};

struct PfcBreakdown {
  int fully_resolved = 0;
  int partially_resolved = 0;
  int no_change = 0;

  int total() const { return fully_resolved + partially_resolved + no_change; }
  double percent(PfcClass c) const;
};

struct StudyReport {
  const NetworkModel* model = nullptr;
  RunMetadata meta;
  std::vector<OverloadRecord> records;
  ScreeningSummary summary;
  std::vector<PfcOutcome> outcomes;
  PfcRanking ranking;
  PfcBreakdown breakdown;
  int stage1_records = 0;
  int stage2_records = 0;
};

/// Assembles the report and checks that the summaries and outcomes are
/// consistent with the raw records; any mismatch throws Error.
StudyReport build_report(std::span<const OverloadRecord> records, const ScreeningSummary& summary,
                         std::span<const PfcOutcome> outcomes, const NetworkModel& model, RunMetadata meta);

struct ReportFormats {
  bool csv = true;
  bool json = true;
  bool svg = true;

  /// Comma-separated subset of csv,json,svg.
  static ReportFormats parse(std::string_view list);
};

struct ManifestEntry {
  std::string path;  // relative to the report directory, '/' separated
  std::string sha256;
  std::uintmax_t bytes = 0;
};

/// Writes the requested formats under out_dir plus manifest.json, which
/// lists every written file with its checksum. The manifest's generated_at
/// field is the only time-dependent output; it honours SOURCE_DATE_EPOCH.
std::vector<ManifestEntry> emit(const StudyReport& report, const std::filesystem::path& out_dir,
                                const ReportFormats& formats = {});

/// Horizontal bar chart as a standalone SVG document.
std::string svg_bar_chart(const std::string& title, const std::string& value_label,
                          std::span<const std::pair<std::string, double>> bars);

}  // namespace pfcat
