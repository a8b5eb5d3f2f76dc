#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pfcat/dcpf.hpp"

namespace pfcat {

/// |1 - phi(k,k)| below this marks an outage as islanding.
inline constexpr double kIslandingTol = 1e-9;

/// Generation shift factors: MW change on each line per MW injected at a bus
/// and withdrawn at the slack. Lines x buses; the slack column is zero.
template <typename Scalar>
struct PtdfMatrix {
  MatrixX<Scalar> values;
  std::vector<std::array<BusIndex, 2>> endpoints;
  std::vector<bool> in_service;
  BusIndex slack = 0;
  std::uint64_t topology = 0;

  Scalar operator()(LineIndex line, BusIndex bus) const {
    return values(static_cast<Eigen::Index>(line), static_cast<Eigen::Index>(bus));
  }

  /// Flow change on every line for a 1 MW transfer from `from` to `to`
  /// (column differencing of the slack-referenced factors).
  VectorX<Scalar> transfer(BusIndex from, BusIndex to) const {
    return values.col(static_cast<Eigen::Index>(from)) - values.col(static_cast<Eigen::Index>(to));
  }
};

/// Line outage shift factors: fraction of outaged line k's pre-outage flow
/// that appears on line l. Lines x lines; the diagonal is -1. Columns of
/// islanding or out-of-service lines hold NaN and are flagged.
template <typename Scalar>
struct LodfMatrix {
  MatrixX<Scalar> values;
  std::vector<bool> islanding;
  std::vector<bool> in_service;
  std::vector<std::string> line_ids;
  std::vector<std::vector<std::string>> islanded_buses;  // per islanding column
  std::uint64_t topology = 0;

  Scalar operator()(LineIndex line, LineIndex outage) const {
    return values(static_cast<Eigen::Index>(line), static_cast<Eigen::Index>(outage));
  }

  /// In service and not islanding.
  bool is_outage_candidate(LineIndex k) const { return in_service[k] && !islanding[k]; }

  std::vector<LineIndex> outage_candidates() const {
    std::vector<LineIndex> out;
    for (LineIndex k = 0; k < islanding.size(); ++k)
      if (is_outage_candidate(k)) out.push_back(k);
    return out;
  }
};

enum class PtdfMethod { kAuto, kPerBus, kPerLine };

/// One back-substitution per non-slack bus, or per in-service line when
/// there are fewer lines (kAuto). Both routes give the same matrix.
template <typename Scalar>
PtdfMatrix<Scalar> compute_ptdf(const SusceptanceSystem<Scalar>& system, PtdfMethod method = PtdfMethod::kAuto) {
  const auto n_bus = static_cast<Eigen::Index>(system.bus_count());
  const auto n_line = static_cast<Eigen::Index>(system.line_count());
  const auto& br = system.branches();

  PtdfMatrix<Scalar> p;
  p.values = MatrixX<Scalar>::Zero(n_line, n_bus);
  p.slack = system.slack_index();
  p.in_service = br.in_service;
  p.topology = system.fingerprint();
  for (LineIndex l = 0; l < system.line_count(); ++l)
    p.endpoints.push_back({system.from_index(l), system.to_index(l)});
  if (n_bus <= 1) return p;

  std::size_t active_lines = 0;
  for (bool s : br.in_service) active_lines += s ? 1 : 0;
  if (method == PtdfMethod::kAuto)
    method = active_lines < system.bus_count() - 1 ? PtdfMethod::kPerLine : PtdfMethod::kPerBus;

  const Eigen::Index n_red = n_bus - 1;
  if (method == PtdfMethod::kPerBus) {
    for (BusIndex b = 0; b < system.bus_count(); ++b) {
      const Eigen::Index r = system.reduced_index(b);
      if (r < 0) continue;
      VectorX<Scalar> rhs = VectorX<Scalar>::Zero(n_red);
      rhs(r) = Scalar(1);
      const VectorX<Scalar> theta_red = system.solve_reduced(rhs);
      for (LineIndex l = 0; l < system.line_count(); ++l) {
        if (!br.in_service[l]) continue;
        const Eigen::Index f = system.reduced_index(system.from_index(l));
        const Eigen::Index t = system.reduced_index(system.to_index(l));
        const Scalar tf = f >= 0 ? theta_red(f) : Scalar(0);
        const Scalar tt = t >= 0 ? theta_red(t) : Scalar(0);
        p.values(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(b)) =
            (tf - tt) / br.reactance(static_cast<Eigen::Index>(l));
      }
    }
  } else {
    // Row l of PTDF is (e_from - e_to)^T B^{-1} / x_l; B is symmetric.
    for (LineIndex l = 0; l < system.line_count(); ++l) {
      if (!br.in_service[l]) continue;
      VectorX<Scalar> rhs = VectorX<Scalar>::Zero(n_red);
      const Eigen::Index f = system.reduced_index(system.from_index(l));
      const Eigen::Index t = system.reduced_index(system.to_index(l));
      if (f >= 0) rhs(f) += Scalar(1);
      if (t >= 0) rhs(t) -= Scalar(1);
      const VectorX<Scalar> y = system.solve_reduced(rhs);
      for (BusIndex b = 0; b < system.bus_count(); ++b) {
        const Eigen::Index r = system.reduced_index(b);
        if (r < 0) continue;
        p.values(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(b)) =
            y(r) / br.reactance(static_cast<Eigen::Index>(l));
      }
    }
  }
  return p;
}

/// LODF(l,k) = phi(l,k) / (1 - phi(k,k)) with phi the PTDF of a transfer
/// from k's from-bus to its to-bus. Columns with |1 - phi(k,k)| < 1e-9 are
/// marked islanding.
template <typename Scalar>
LodfMatrix<Scalar> compute_lodf(const PtdfMatrix<Scalar>& ptdf, const NetworkModel& model) {
  const auto n = static_cast<Eigen::Index>(ptdf.endpoints.size());
  LodfMatrix<Scalar> d;
  d.values.resize(n, n);
  d.islanding.assign(static_cast<std::size_t>(n), false);
  d.in_service = ptdf.in_service;
  d.islanded_buses.resize(static_cast<std::size_t>(n));
  d.topology = ptdf.topology;
  for (const auto& l : model.lines()) d.line_ids.push_back(l.id);

  const Scalar nan = std::numeric_limits<Scalar>::quiet_NaN();
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    if (!ptdf.in_service[ku]) {
      d.values.col(k).setConstant(nan);
      continue;
    }
    const VectorX<Scalar> phi = ptdf.transfer(ptdf.endpoints[ku][0], ptdf.endpoints[ku][1]);
    const Scalar denom = Scalar(1) - phi(k);
    if (std::abs(denom) < static_cast<Scalar>(kIslandingTol)) {
      d.islanding[ku] = true;
      d.values.col(k).setConstant(nan);
      auto mask = ptdf.in_service;
      mask[ku] = false;
      for (BusIndex b : buses_separated_from_slack(model, mask))
        d.islanded_buses[ku].push_back(model.buses()[b].id);
      continue;
    }
    d.values.col(k) = phi / denom;
    for (Eigen::Index l = 0; l < n; ++l)
      if (!ptdf.in_service[static_cast<std::size_t>(l)]) d.values(l, k) = Scalar(0);
    d.values(k, k) = Scalar(-1);
  }
  return d;
}

/// Line flows after losing `outage`, by superposition on the base flows:
/// flow'(l) = flow(l) + LODF(l,k) flow(k), flow'(k) = 0.
template <typename Scalar>
VectorX<Scalar> post_contingency_flows(const VectorX<Scalar>& base_flows, const LodfMatrix<Scalar>& lodf,
                                       LineIndex outage) {
  if (lodf.islanding.at(outage))
    throw IslandingError(lodf.line_ids.at(outage), lodf.islanded_buses.at(outage));
  if (!lodf.in_service.at(outage))
    throw SolverError("line " + lodf.line_ids.at(outage) + " is already out of service");
  const auto k = static_cast<Eigen::Index>(outage);
  VectorX<Scalar> post = base_flows + lodf.values.col(k) * base_flows(k);
  post(k) = Scalar(0);
  return post;
}

/// Same, but refuses a base solution computed on a different topology than
/// the factors (e.g. after a reactance change).
template <typename Scalar>
VectorX<Scalar> post_contingency_flows(const FlowSolution<Scalar>& base, const LodfMatrix<Scalar>& lodf,
                                       LineIndex outage) {
  if (base.topology != lodf.topology)
    throw SolverError("shift factors are stale: computed for a different topology than the base flows");
  return post_contingency_flows(base.flows_mw, lodf, outage);
}

template <typename Scalar>
struct ShiftFactors {
  PtdfMatrix<Scalar> ptdf;
  LodfMatrix<Scalar> lodf;
};

template <typename Scalar>
ShiftFactors<Scalar> compute_shift_factors(const SusceptanceSystem<Scalar>& system, const NetworkModel& model) {
  auto ptdf = compute_ptdf(system);
  auto lodf = compute_lodf(ptdf, model);
  return {std::move(ptdf), std::move(lodf)};
}

/// Holds the factors for one topology; recomputes them whenever the requested
/// branch state (reactances, service flags) differs from the cached one.
class ShiftFactorCache {
 public:
  const ShiftFactors<double>& get(const NetworkModel& model, const BranchState<double>& branches);
  std::size_t recomputations() const { return recomputations_; }
  void invalidate() { cached_.reset(); }

 private:
  std::optional<ShiftFactors<double>> cached_;
  std::size_t recomputations_ = 0;
};

/// Audit exports: "line,bus,value" and "monitored_line,outage_line,value";
/// islanding columns carry the text "islanding".
void write_ptdf_csv(std::ostream& out, const PtdfMatrix<double>& ptdf, const NetworkModel& model);
void write_lodf_csv(std::ostream& out, const LodfMatrix<double>& lodf, const NetworkModel& model);

extern template PtdfMatrix<double> compute_ptdf(const SusceptanceSystem<double>&, PtdfMethod);
extern template LodfMatrix<double> compute_lodf(const PtdfMatrix<double>&, const NetworkModel&);

}  // namespace pfcat
