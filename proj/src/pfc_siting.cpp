#include "pfcat/pfc_siting.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>

#include "pfcat/csv.hpp"
#include "pfcat/dcpf.hpp"
#include "pfcat/errors.hpp"
#include "pfcat/parallel.hpp"

namespace pfcat {
namespace {

constexpr double kSensitivityTol = 1e-6;
constexpr double kWorsenTolPct = 1e-9;

double transfer_factor(const PtdfMatrix<double>& ptdf, LineIndex m, LineIndex c) {
  return ptdf(m, ptdf.endpoints[c][0]) - ptdf(m, ptdf.endpoints[c][1]);
}

void require_connected_after(const NetworkModel& model, std::optional<LineIndex> contingency) {
  if (!contingency) return;
  auto mask = model.in_service_mask();
  mask.at(*contingency) = false;
  auto separated = buses_separated_from_slack(model, mask);
  if (separated.empty()) return;
  std::vector<std::string> ids;
  for (BusIndex b : separated) ids.push_back(model.buses()[b].id);
  throw IslandingError(model.lines()[*contingency].id, std::move(ids));
}

BranchState<double> device_state(const NetworkModel& model, std::optional<LineIndex> contingency,
                                 std::optional<LineIndex> pfc_line, double delta_pct) {
  auto s = BranchState<double>::from_model(model);
  if (contingency) s = s.with_outage(*contingency);
  if (pfc_line && delta_pct != 0.0) s = s.with_reactance_scale(*pfc_line, 1.0 + delta_pct / 100.0);
  return s;
}

int grid_steps(const PfcOptions& o) {
  if (!(o.tolerance_pct > 0.0) || !(o.cap_pct > 0.0))
    throw std::invalid_argument("PFC cap and tolerance must be positive");
  return static_cast<int>(std::llround(o.cap_pct / o.tolerance_pct));
}

// Side-effect rule shared by the public check and the batched evaluation.
bool is_violation(double pre_pct, double post_pct, double limit_pct) {
  return post_pct > limit_pct && post_pct > pre_pct + kWorsenTolPct;
}

// All overloaded operating points of one target under one contingency.
struct Group {
  std::optional<LineIndex> contingency;
  std::vector<int> hours;
  Eigen::MatrixXd injections;   // buses x pairs
  Eigen::MatrixXd ratings;      // lines x pairs, effective MW
  Eigen::MatrixXd pre_loading;  // lines x pairs, % without the device
  Eigen::Index worst = 0;       // pair with the highest target loading
};

// Exact evaluation of one (candidate, contingency, delta) over a whole group.
struct Eval {
  std::vector<char> target_ok;  // target within limit
  std::vector<char> no_violation;
  std::vector<char> clean;      // every line within limit
  std::vector<double> max_loading;
  std::set<LineIndex> violating;
};

using Columns = std::vector<Eigen::Index>;

// Per-column grid bisection run for all columns at once, so each grid point
// is evaluated once for every column whose search interval needs it.
// `ok(k, cols)` returns one flag per column. Returns the smallest k with
// ok, or nothing where ok(steps) is false.
template <typename Ok>
std::vector<std::optional<int>> bisect_columns(Eigen::Index m, int steps, Ok&& ok) {
  std::vector<std::optional<int>> out(static_cast<std::size_t>(m));
  std::vector<int> lo(out.size(), 0), hi(out.size(), steps);
  Columns open, all(static_cast<std::size_t>(m));
  for (Eigen::Index j = 0; j < m; ++j) all[static_cast<std::size_t>(j)] = j;
  const auto at0 = ok(0, all);
  Columns rest;
  for (std::size_t i = 0; i < all.size(); ++i) (at0[i] ? out[i] = 0, void() : rest.push_back(all[i]));
  if (rest.empty()) return out;
  const auto at_cap = ok(steps, rest);
  for (std::size_t i = 0; i < rest.size(); ++i)
    if (at_cap[i]) open.push_back(rest[i]);
  while (!open.empty()) {
    std::map<int, Columns> by_mid;
    Columns next;
    for (auto j : open) {
      const auto u = static_cast<std::size_t>(j);
      if (hi[u] - lo[u] <= 1) {
        out[u] = hi[u];
        continue;
      }
      by_mid[lo[u] + (hi[u] - lo[u]) / 2].push_back(j);
    }
    for (const auto& [mid, cols] : by_mid) {
      const auto flags = ok(mid, cols);
      for (std::size_t i = 0; i < cols.size(); ++i) {
        const auto u = static_cast<std::size_t>(cols[i]);
        (flags[i] ? hi[u] : lo[u]) = mid;
        next.push_back(cols[i]);
      }
    }
    open = std::move(next);
  }
  return out;
}

class TargetStudy {
 public:
  TargetStudy(LineIndex target, std::span<const OverloadRecord> records, const SitingInputs& in,
              const PfcOptions& opt)
      : target_(target), in_(in), opt_(opt), steps_(grid_steps(opt)) {
    std::map<std::optional<LineIndex>, std::map<int, double>> by_contingency;
    for (const auto& r : records)
      if (r.line == target && r.cls == OverloadClass::kOverload) {
        auto& worst = by_contingency[r.contingency][r.hour];
        worst = std::max(worst, r.loading_pct);
      }
    const auto& model = in.model;
    for (auto& [k, hours] : by_contingency) {
      require_connected_after(model, k);
      Group g;
      g.contingency = k;
      const auto m = static_cast<Eigen::Index>(hours.size());
      g.injections.resize(static_cast<Eigen::Index>(model.bus_count()), m);
      g.ratings.resize(static_cast<Eigen::Index>(model.line_count()), m);
      double worst = -1.0;
      for (const auto& [hour, loading] : hours) {
        const auto j = static_cast<Eigen::Index>(g.hours.size());
        const auto col = in.flows.column_of(hour);
        if (!col) throw Error("overload record for hour " + std::to_string(hour) + " has no Stage-1 flows");
        g.injections.col(j) = in.flows.injections_mw.col(*col);
        for (LineIndex l = 0; l < model.line_count(); ++l)
          g.ratings(static_cast<Eigen::Index>(l), j) = effective_rating(model.lines()[l], hour, in.calendar);
        if (loading > worst) worst = loading, g.worst = j;
        g.hours.push_back(hour);
        hour_pairs_[hour].push_back({groups_.size(), j});
      }
      const auto sys = build_system(model, device_state(model, k, std::nullopt, 0.0));
      g.pre_loading = (100.0 * sys.flows_batch(g.injections).cwiseAbs()).cwiseQuotient(g.ratings);
      groups_.push_back(std::move(g));
    }
  }

  PfcOutcome run() {
    PfcOutcome out;
    out.target = target_;
    out.overload_hours = static_cast<int>(hour_pairs_.size());
    if (groups_.empty()) return out;

    const auto candidates = union_candidates();
    if (candidates.empty()) {
      out.cls = PfcClass::kNoChange;
      for (const auto& g : groups_)
        if (g.pre_loading.size()) out.residual_max_loading_pct = std::max(out.residual_max_loading_pct, g.pre_loading.maxCoeff());
      return out;
    }

    struct Choice {
      std::size_t candidate = 0;
      int k = 0;
      int resolved = -1;
    };
    std::optional<Choice> full;
    Choice best;
    std::vector<std::vector<std::optional<int>>> pair_steps(candidates.size());
    std::vector<std::optional<int>> full_steps(candidates.size());

    for (std::size_t ci = 0; ci < candidates.size() && !full; ++ci) {
      reset(candidates[ci]);
      // Per pair: first grid step clearing the target, first step with a
      // side effect. A single reactance change moves every flow along one
      // scalar, so both conditions are monotone in the step.
      std::vector<std::vector<std::optional<int>>> clear(groups_.size()), harm(groups_.size());
      bool all_found = true;
      int k_full = 0;
      for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
        const auto m = static_cast<Eigen::Index>(groups_[gi].hours.size());
        clear[gi] = bisect_columns(m, steps_, [&](int k, const Columns& cols) { return target_ok(gi, k, cols); });
        harm[gi] = bisect_columns(m, steps_, [&](int k, const Columns& cols) { return violated(gi, k, cols); });
        for (const auto& s : clear[gi]) {
          pair_steps[ci].push_back(s);
          if (s) k_full = std::max(k_full, *s);
          else all_found = false;
        }
      }
      if (all_found) {
        full_steps[ci] = k_full;
        bool clean = true;
        for (std::size_t gi = 0; gi < groups_.size() && clean; ++gi) {
          const auto e = evaluate(gi, k_full);
          clean = std::all_of(e.clean.begin(), e.clean.end(), [](char v) { return v != 0; });
        }
        if (clean) {
          full = Choice{ci, k_full, out.overload_hours};
          break;
        }
      }
      // Hours resolved at step k: every pair of the hour has clear <= k < harm.
      std::vector<int> delta_count(static_cast<std::size_t>(steps_) + 2, 0);
      for (const auto& [hour, pairs] : hour_pairs_) {
        int from = 0, until = steps_ + 1;
        for (const auto& [gi, j] : pairs) {
          const auto& c = clear[gi][static_cast<std::size_t>(j)];
          const auto& h = harm[gi][static_cast<std::size_t>(j)];
          from = c ? std::max(from, *c) : steps_ + 1;
          until = std::min(until, h.value_or(steps_ + 1));
        }
        if (from < until) {
          ++delta_count[static_cast<std::size_t>(from)];
          --delta_count[static_cast<std::size_t>(until)];
        }
      }
      int running = 0, best_k = -1, best_n = 0;
      for (int k = 0; k <= steps_; ++k) {
        running += delta_count[static_cast<std::size_t>(k)];
        if (running > best_n) best_n = running, best_k = k;
      }
      if (best_k >= 0) {
        const int exact = resolved_hours(best_k);
        if (exact > best.resolved) best = Choice{ci, best_k, exact};
      }
    }

    Choice chosen;
    if (full) {
      chosen = *full;
      out.cls = PfcClass::kFullyResolved;
    } else {
      out.cls = PfcClass::kPartiallyResolved;
      chosen = best.resolved > 0 ? best : Choice{0, steps_, 0};
    }
    const LineIndex c = candidates[chosen.candidate];
    reset(c);
    out.pfc_line = c;
    out.delta_pct = chosen.k * opt_.tolerance_pct;
    out.resolved_hours = chosen.resolved;
    const int k_report = full_steps[chosen.candidate].value_or(steps_);
    std::set<LineIndex> side;
    for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
      const auto e = evaluate(gi, chosen.k);
      for (double v : e.max_loading) out.residual_max_loading_pct = std::max(out.residual_max_loading_pct, v);
      const auto r = evaluate(gi, k_report);
      side.insert(r.violating.begin(), r.violating.end());
    }
    out.side_effect_lines.assign(side.begin(), side.end());

    std::size_t p = 0;
    for (const auto& g : groups_)
      for (int hour : g.hours) {
        const auto& k = pair_steps[chosen.candidate][p++];
        out.adaptive.push_back(
            PairDelta{hour, g.contingency, k ? std::optional<double>(*k * opt_.tolerance_pct) : std::nullopt});
      }
    std::stable_sort(out.adaptive.begin(), out.adaptive.end(), [](const PairDelta& a, const PairDelta& b) {
      if (a.hour != b.hour) return a.hour < b.hour;
      return a.contingency < b.contingency;
    });
    return out;
  }

 private:
  std::vector<LineIndex> union_candidates() const {
    std::map<LineIndex, double> relief;
    for (const auto& g : groups_) {
      const auto col = *in_.flows.column_of(g.hours[static_cast<std::size_t>(g.worst)]);
      const Eigen::VectorXd base = in_.flows.flows_mw.col(col);
      for (const auto& cand : candidate_locations(target_, g.contingency, base, in_.ptdf, in_.lodf, in_.model)) {
        auto [it, inserted] = relief.emplace(cand.pfc_line, cand.relief_mw_per_pct);
        if (!inserted) it->second = std::max(it->second, cand.relief_mw_per_pct);
      }
    }
    std::vector<std::pair<LineIndex, double>> sorted(relief.begin(), relief.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<LineIndex> out;
    for (const auto& [l, r] : sorted) out.push_back(l);
    return out;
  }

  void reset(LineIndex candidate) {
    candidate_ = candidate;
    ptdf_cache_.assign(groups_.size(), {});
  }

  // Shift factors of the network with the contingency removed and the
  // candidate's reactance scaled, from a fresh factorization.
  const Eigen::MatrixXd& ptdf_at(std::size_t gi, int k) {
    auto& slot = ptdf_cache_[gi];
    if (auto it = slot.find(k); it != slot.end()) return it->second;
    const auto sys =
        build_system(in_.model, device_state(in_.model, groups_[gi].contingency, candidate_, k * opt_.tolerance_pct));
    return slot.emplace(k, compute_ptdf(sys).values).first->second;
  }

  Eigen::MatrixXd loadings(std::size_t gi, int k, const Columns& cols) {
    const Group& g = groups_[gi];
    const auto n = static_cast<Eigen::Index>(cols.size());
    Eigen::MatrixXd inj(g.injections.rows(), n), rating(g.ratings.rows(), n);
    for (Eigen::Index i = 0; i < n; ++i) {
      inj.col(i) = g.injections.col(cols[static_cast<std::size_t>(i)]);
      rating.col(i) = g.ratings.col(cols[static_cast<std::size_t>(i)]);
    }
    return (100.0 * (ptdf_at(gi, k) * inj).cwiseAbs()).cwiseQuotient(rating);
  }

  bool line_active(std::size_t gi, LineIndex l) const {
    return in_.lodf.in_service[l] && groups_[gi].contingency != l;
  }

  std::vector<char> target_ok(std::size_t gi, int k, const Columns& cols) {
    const auto post = loadings(gi, k, cols);
    std::vector<char> out(cols.size());
    for (std::size_t i = 0; i < cols.size(); ++i)
      out[i] = post(static_cast<Eigen::Index>(target_), static_cast<Eigen::Index>(i)) <= opt_.thresholds.overload_pct;
    return out;
  }

  std::vector<char> violated(std::size_t gi, int k, const Columns& cols) {
    const auto post = loadings(gi, k, cols);
    const auto& pre = groups_[gi].pre_loading;
    std::vector<char> out(cols.size(), 0);
    for (std::size_t i = 0; i < cols.size(); ++i)
      for (LineIndex l = 0; l < in_.model.line_count() && !out[i]; ++l)
        if (line_active(gi, l) && is_violation(pre(static_cast<Eigen::Index>(l), cols[i]),
                                               post(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(i)),
                                               opt_.thresholds.overload_pct))
          out[i] = 1;
    return out;
  }

  Eval evaluate(std::size_t gi, int k) {
    const Group& g = groups_[gi];
    Columns all(g.hours.size());
    for (std::size_t j = 0; j < all.size(); ++j) all[j] = static_cast<Eigen::Index>(j);
    const auto post = loadings(gi, k, all);
    const double limit = opt_.thresholds.overload_pct;
    Eval e;
    e.target_ok.resize(all.size());
    e.no_violation.resize(all.size());
    e.clean.resize(all.size());
    e.max_loading.resize(all.size());
    for (std::size_t j = 0; j < all.size(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      e.target_ok[j] = post(static_cast<Eigen::Index>(target_), jj) <= limit;
      bool violation = false;
      double max_loading = 0.0;
      for (LineIndex l = 0; l < in_.model.line_count(); ++l) {
        if (!line_active(gi, l)) continue;
        const auto ll = static_cast<Eigen::Index>(l);
        max_loading = std::max(max_loading, post(ll, jj));
        if (is_violation(g.pre_loading(ll, jj), post(ll, jj), limit)) {
          violation = true;
          e.violating.insert(l);
        }
      }
      e.no_violation[j] = !violation;
      e.clean[j] = max_loading <= limit;
      e.max_loading[j] = max_loading;
    }
    return e;
  }

  // Exact count at one step: hours whose every pair clears the target
  // without a side effect.
  int resolved_hours(int k) {
    std::vector<Eval> evals;
    for (std::size_t gi = 0; gi < groups_.size(); ++gi) evals.push_back(evaluate(gi, k));
    int resolved = 0;
    for (const auto& [hour, pairs] : hour_pairs_) {
      bool ok = true;
      for (const auto& [gi, j] : pairs) {
        const auto jj = static_cast<std::size_t>(j);
        ok = ok && evals[gi].target_ok[jj] && evals[gi].no_violation[jj];
      }
      resolved += ok ? 1 : 0;
    }
    return resolved;
  }

  LineIndex target_;
  const SitingInputs& in_;
  const PfcOptions& opt_;
  int steps_;
  std::vector<Group> groups_;
  std::map<int, std::vector<std::pair<std::size_t, Eigen::Index>>> hour_pairs_;
  LineIndex candidate_ = 0;
  std::vector<std::map<int, Eigen::MatrixXd>> ptdf_cache_;
};

std::string format_delta(const std::optional<double>& d) { return d ? csv::format_fixed(*d, 1) : std::string(); }

}  // namespace

std::string_view to_string(PfcClass c) {
  switch (c) {
    case PfcClass::kFullyResolved: return "FullyResolved";
    case PfcClass::kPartiallyResolved: return "PartiallyResolved";
    case PfcClass::kNoChange: return "NoChange";
  }
  return "NoChange";
}

std::optional<PfcClass> parse_pfc_class(std::string_view text) {
  for (auto c : {PfcClass::kFullyResolved, PfcClass::kPartiallyResolved, PfcClass::kNoChange})
    if (text == to_string(c)) return c;
  return std::nullopt;
}

std::vector<PfcCandidate> candidate_locations(LineIndex target, std::optional<LineIndex> contingency,
                                              const Eigen::VectorXd& base_flows, const PtdfMatrix<double>& ptdf,
                                              const LodfMatrix<double>& lodf, const NetworkModel& model) {
  if (ptdf.topology != lodf.topology) throw SolverError("PTDF and LODF were computed for different topologies");
  if (contingency && !lodf.is_outage_candidate(*contingency))
    throw IslandingError(model.lines()[*contingency].id, lodf.islanded_buses.at(*contingency));

  Eigen::VectorXd flows = base_flows;
  if (contingency) {
    const auto k = static_cast<Eigen::Index>(*contingency);
    flows += lodf.values.col(k) * base_flows(k);
    flows(k) = 0.0;
  }
  // Transfer factor onto the target in the post-contingency network.
  auto phi = [&](LineIndex c) {
    double v = transfer_factor(ptdf, target, c);
    if (contingency) v += lodf(target, *contingency) * transfer_factor(ptdf, *contingency, c);
    return v;
  };

  const double ft = flows(static_cast<Eigen::Index>(target));
  const double sign = ft < 0.0 ? -1.0 : 1.0;
  std::vector<PfcCandidate> out;
  for (LineIndex c = 0; c < model.line_count(); ++c) {
    if (!lodf.in_service[c] || (contingency && c == *contingency)) continue;
    PfcCandidate cand{target, c, 0.0, 0.0};
    if (c == target) {
      cand.sensitivity = 1.0 - phi(c);
      cand.relief_mw_per_pct = 0.01 * std::abs(ft) * cand.sensitivity;
    } else {
      cand.sensitivity = phi(c);
      cand.relief_mw_per_pct = -0.01 * sign * cand.sensitivity * flows(static_cast<Eigen::Index>(c));
    }
    if (std::abs(cand.sensitivity) > kSensitivityTol) out.push_back(cand);
  }
  std::stable_sort(out.begin(), out.end(), [](const PfcCandidate& a, const PfcCandidate& b) {
    return a.relief_mw_per_pct > b.relief_mw_per_pct;
  });
  return out;
}

std::optional<double> min_reactance_increase(const NetworkModel& model, const Eigen::VectorXd& injections_mw,
                                             std::optional<LineIndex> contingency, LineIndex target,
                                             LineIndex candidate, double rating_mw, double cap_pct,
                                             double tol_pct) {
  require_connected_after(model, contingency);
  if (contingency && candidate == *contingency) throw std::invalid_argument("PFC line is the contingency line");
  PfcOptions opt;
  opt.cap_pct = cap_pct;
  opt.tolerance_pct = tol_pct;
  const int steps = grid_steps(opt);
  auto k = grid_bisect(steps, [&](int kk) {
    const auto sys = build_system(model, device_state(model, contingency, candidate, kk * tol_pct));
    const auto sol = solve_flows(sys, injections_mw);
    return std::abs(sol.flows_mw(static_cast<Eigen::Index>(target))) <= rating_mw;
  });
  if (!k) return std::nullopt;
  return *k * tol_pct;
}

std::vector<LineIndex> check_side_effects(const NetworkModel& model, const Eigen::VectorXd& injections_mw,
                                          std::optional<LineIndex> contingency, LineIndex pfc_line,
                                          double delta_pct, int hour, const SeasonCalendar& calendar,
                                          const Thresholds& thresholds) {
  require_connected_after(model, contingency);
  const auto pre = solve_flows(build_system(model, device_state(model, contingency, std::nullopt, 0.0)), injections_mw);
  const auto post_sys = build_system(model, device_state(model, contingency, pfc_line, delta_pct));
  const auto post = solve_flows(post_sys, injections_mw);
  std::vector<LineIndex> out;
  for (LineIndex l = 0; l < model.line_count(); ++l) {
    if (!post_sys.branches().in_service[l]) continue;
    const double rating = effective_rating(model.lines()[l], hour, calendar);
    const auto i = static_cast<Eigen::Index>(l);
    if (is_violation(100.0 * std::abs(pre.flows_mw(i)) / rating, 100.0 * std::abs(post.flows_mw(i)) / rating,
                     thresholds.overload_pct))
      out.push_back(l);
  }
  return out;
}

std::vector<LineIndex> overloaded_targets(std::span<const OverloadRecord> records) {
  std::set<LineIndex> lines;
  for (const auto& r : records)
    if (r.cls == OverloadClass::kOverload) lines.insert(r.line);
  return {lines.begin(), lines.end()};
}

PfcOutcome assess_target(LineIndex target, std::span<const OverloadRecord> records, const SitingInputs& inputs,
                         const PfcOptions& options) {
  if (inputs.flows.topology != inputs.lodf.topology || inputs.ptdf.topology != inputs.lodf.topology)
    throw SolverError("shift factors are stale: computed for a different topology than the Stage-1 flows");
  return TargetStudy(target, records, inputs, options).run();
}

std::vector<PfcOutcome> assess_all(std::span<const OverloadRecord> records, const SitingInputs& inputs,
                                   const PfcOptions& options) {
  const auto targets = overloaded_targets(records);
  std::vector<PfcOutcome> out(targets.size());
  parallel_chunks(targets.size(), options.workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = assess_target(targets[i], records, inputs, options);
  });
  return out;
}

PfcRanking rank_targets(std::span<const PfcOutcome> outcomes, const ScreeningSummary& summary,
                        const NetworkModel& model) {
  PfcRanking ranking;
  for (const auto& o : outcomes) {
    RankedTarget r;
    r.target = o.target;
    r.cls = o.cls;
    const auto* s = summary.find(o.target);
    r.overload_hours = s ? s->overload_hours : o.overload_hours;
    r.resolved_fraction = o.resolved_fraction();
    r.delta_pct = o.delta_pct;
    ranking.push_back(r);
  }
  std::sort(ranking.begin(), ranking.end(), [&](const RankedTarget& a, const RankedTarget& b) {
    if (a.cls != b.cls) return a.cls < b.cls;
    if (a.overload_hours != b.overload_hours) return a.overload_hours > b.overload_hours;
    if (a.resolved_fraction != b.resolved_fraction) return a.resolved_fraction > b.resolved_fraction;
    const double da = a.delta_pct.value_or(INFINITY), db = b.delta_pct.value_or(INFINITY);
    if (da != db) return da < db;
    return model.lines()[a.target].id < model.lines()[b.target].id;
  });
  for (std::size_t i = 0; i < ranking.size(); ++i) ranking[i].rank = static_cast<int>(i) + 1;
  return ranking;
}

void write_pfc_outcomes_csv(std::ostream& out, std::span<const PfcOutcome> outcomes, const NetworkModel& model) {
  csv::write_row(out, {"target_line", "classification", "pfc_line", "delta_pct", "overload_hours", "resolved_hours",
                       "residual_max_loading_pct", "side_effect_lines"});
  for (const auto& o : outcomes) {
    std::string side;
    for (LineIndex l : o.side_effect_lines) side += (side.empty() ? "" : ";") + model.lines()[l].id;
    csv::write_row(out, {model.lines()[o.target].id, std::string(to_string(o.cls)),
                         o.pfc_line ? model.lines()[*o.pfc_line].id : std::string(), format_delta(o.delta_pct),
                         std::to_string(o.overload_hours), std::to_string(o.resolved_hours),
                         csv::format_number(o.residual_max_loading_pct), side});
  }
}

std::vector<PfcOutcome> read_pfc_outcomes_csv(const std::filesystem::path& path, const NetworkModel& model) {
  const auto t = csv::Table::read(path);
  t.require_header({"target_line", "classification", "pfc_line", "delta_pct", "overload_hours", "resolved_hours",
                    "residual_max_loading_pct", "side_effect_lines"});
  auto line_of = [&](const csv::Row& r, std::string_view id) {
    const auto l = model.find_line(id);
    if (!l) throw ParseError(t.source(), r.line, "unknown line '" + std::string(id) + "'");
    return *l;
  };
  std::vector<PfcOutcome> out;
  for (const auto& r : t.rows()) {
    PfcOutcome o;
    o.target = line_of(r, t.text(r, 0));
    const auto cls = parse_pfc_class(t.text(r, 1));
    if (!cls) throw ParseError(t.source(), r.line, "unknown classification '" + t.text(r, 1) + "'");
    o.cls = *cls;
    if (!t.text(r, 2).empty()) o.pfc_line = line_of(r, t.text(r, 2));
    if (!t.text(r, 3).empty()) o.delta_pct = t.number(r, 3);
    o.overload_hours = static_cast<int>(t.integer(r, 4));
    o.resolved_hours = static_cast<int>(t.integer(r, 5));
    o.residual_max_loading_pct = t.number(r, 6);
    std::string_view side = t.text(r, 7);
    while (!side.empty()) {
      const auto cut = side.find(';');
      o.side_effect_lines.push_back(line_of(r, side.substr(0, cut)));
      side = cut == std::string_view::npos ? std::string_view() : side.substr(cut + 1);
    }
    out.push_back(std::move(o));
  }
  return out;
}

void write_pfc_ranking_csv(std::ostream& out, const PfcRanking& ranking, const NetworkModel& model) {
  csv::write_row(out, {"rank", "target_line", "classification", "overload_hours", "resolved_fraction", "delta_pct"});
  for (const auto& r : ranking)
    csv::write_row(out, {std::to_string(r.rank), model.lines()[r.target].id, std::string(to_string(r.cls)),
                         std::to_string(r.overload_hours), csv::format_number(r.resolved_fraction),
                         format_delta(r.delta_pct)});
}

void write_pfc_adaptive_csv(std::ostream& out, std::span<const PfcOutcome> outcomes, const NetworkModel& model) {
  csv::write_row(out, {"target_line", "pfc_line", "hour", "contingency", "delta_pct"});
  for (const auto& o : outcomes) {
    if (!o.pfc_line) continue;
    for (const auto& p : o.adaptive)
      csv::write_row(out, {model.lines()[o.target].id, model.lines()[*o.pfc_line].id, std::to_string(p.hour),
                           p.contingency ? model.lines()[*p.contingency].id : std::string(),
                           format_delta(p.delta_pct)});
  }
}

}  // namespace pfcat
