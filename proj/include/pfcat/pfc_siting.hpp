#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pfcat/network.hpp"
#include "pfcat/screening.hpp"
#include "pfcat/shift_factors.hpp"

namespace pfcat {

/// A series reactance increase on `pfc_line` intended to relieve `target`.
struct PfcCandidate {
  LineIndex target = 0;
  LineIndex pfc_line = 0;
  double sensitivity = 0.0;       // d(target flow) per unit transfer across pfc_line
  double relief_mw_per_pct = 0.0; // first-order |flow| reduction on target per 1% increase
};

enum class PfcClass { kFullyResolved, kPartiallyResolved, kNoChange };

std::string_view to_string(PfcClass c);
std::optional<PfcClass> parse_pfc_class(std::string_view text);

struct PfcOptions {
  double cap_pct = 40.0;
  double tolerance_pct = 0.1;
  Thresholds thresholds;
  std::size_t workers = 1;
};

/// Minimal increase found for one overloaded (hour, contingency) of a target.
struct PairDelta {
  int hour = 0;
  std::optional<LineIndex> contingency;
  std::optional<double> delta_pct;  // empty when even the cap fails
};

struct PfcOutcome {
  LineIndex target = 0;
  PfcClass cls = PfcClass::kNoChange;
  std::optional<LineIndex> pfc_line;
  std::optional<double> delta_pct;
  int overload_hours = 0;
  int resolved_hours = 0;
  double residual_max_loading_pct = 0.0;
  std::vector<LineIndex> side_effect_lines;
  std::vector<PairDelta> adaptive;  // per-pair minimal increase on pfc_line

  double resolved_fraction() const {
    return overload_hours > 0 ? static_cast<double>(resolved_hours) / overload_hours : 0.0;
  }
};

struct RankedTarget {
  int rank = 0;
  LineIndex target = 0;
  PfcClass cls = PfcClass::kNoChange;
  int overload_hours = 0;
  double resolved_fraction = 0.0;
  std::optional<double> delta_pct;
};

using PfcRanking = std::vector<RankedTarget>;

/// Candidate hosts for a device relieving `target` at one operating point:
/// base_flows are intact-network flows, `contingency` (if any) is applied
/// through the LODF. Lines with |sensitivity| <= 1e-6 are dropped, as is the
/// contingency line. Sorted by descending relief, then line index. Empty
/// when the target is a bridge of the post-contingency network.
std::vector<PfcCandidate> candidate_locations(LineIndex target, std::optional<LineIndex> contingency,
                                              const Eigen::VectorXd& base_flows, const PtdfMatrix<double>& ptdf,
                                              const LodfMatrix<double>& lodf, const NetworkModel& model);

/// Smallest k in [0, steps] with ok(k), assuming ok is monotone; checks 0
/// and `steps` first. Empty when ok(steps) is false.
template <typename Ok>
std::optional<int> grid_bisect(int steps, Ok&& ok) {
  if (ok(0)) return 0;
  if (!ok(steps)) return std::nullopt;
  int lo = 0, hi = steps;  // ok(lo) false, ok(hi) true
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

/// Smallest increase (multiple of tol_pct, at most cap_pct) of the reactance
/// of `candidate` that brings |flow| on `target` to within `rating_mw`, by
/// exact re-solve with `contingency` removed. Returns 0 if no device is
/// needed and nothing if the cap is not enough. Throws IslandingError when
/// the contingency splits the network.
std::optional<double> min_reactance_increase(const NetworkModel& model, const Eigen::VectorXd& injections_mw,
                                             std::optional<LineIndex> contingency, LineIndex target,
                                             LineIndex candidate, double rating_mw, double cap_pct = 40.0,
                                             double tol_pct = 0.1);

/// Lines above 100% of effective rating after the device is applied that
/// were not already at an equal or higher loading without it.
std::vector<LineIndex> check_side_effects(const NetworkModel& model, const Eigen::VectorXd& injections_mw,
                                          std::optional<LineIndex> contingency, LineIndex pfc_line,
                                          double delta_pct, int hour, const SeasonCalendar& calendar,
                                          const Thresholds& thresholds = {});

/// Everything Stage 3 needs besides the records themselves.
struct SitingInputs {
  const NetworkModel& model;
  const YearFlows& flows;
  const PtdfMatrix<double>& ptdf;
  const LodfMatrix<double>& lodf;
  const SeasonCalendar& calendar;
};

/// Lines with at least one overload-class record, ascending.
std::vector<LineIndex> overloaded_targets(std::span<const OverloadRecord> records);

PfcOutcome assess_target(LineIndex target, std::span<const OverloadRecord> records, const SitingInputs& inputs,
                         const PfcOptions& options);

/// assess_target for every overloaded line, in target order.
std::vector<PfcOutcome> assess_all(std::span<const OverloadRecord> records, const SitingInputs& inputs,
                                   const PfcOptions& options);

PfcRanking rank_targets(std::span<const PfcOutcome> outcomes, const ScreeningSummary& summary,
                        const NetworkModel& model);

void write_pfc_outcomes_csv(std::ostream& out, std::span<const PfcOutcome> outcomes, const NetworkModel& model);
std::vector<PfcOutcome> read_pfc_outcomes_csv(const std::filesystem::path& path, const NetworkModel& model);
void write_pfc_ranking_csv(std::ostream& out, const PfcRanking& ranking, const NetworkModel& model);
void write_pfc_adaptive_csv(std::ostream& out, std::span<const PfcOutcome> outcomes, const NetworkModel& model);

}  // namespace pfcat
