#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "pfcat/errors.hpp"
#include "pfcat/hash.hpp"
#include "pfcat/network.hpp"

namespace pfcat {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Net injections above this (MW) are rejected instead of being absorbed by
/// the slack bus.
inline constexpr double kInjectionImbalanceTolMw = 1e-6;

/// Relative pivot threshold below which a factorization counts as singular.
inline constexpr double kSingularPivotTol = 1e-12;

/// Per-line electrical state used to assemble a susceptance system: the
/// model's reactances and service flags, optionally perturbed by an outage
/// or a series-reactance increase.
template <typename Scalar>
struct BranchState {
  VectorX<Scalar> reactance;
  std::vector<bool> in_service;

  static BranchState from_model(const NetworkModel& model) {
    BranchState s;
    s.reactance.resize(static_cast<Eigen::Index>(model.line_count()));
    s.in_service = model.in_service_mask();
    for (LineIndex l = 0; l < model.line_count(); ++l)
      s.reactance(static_cast<Eigen::Index>(l)) = static_cast<Scalar>(model.lines()[l].reactance_pu);
    return s;
  }

  BranchState with_outage(LineIndex line) const {
    BranchState s = *this;
    s.in_service.at(line) = false;
    return s;
  }

  BranchState with_reactance_scale(LineIndex line, Scalar factor) const {
    BranchState s = *this;
    s.reactance(static_cast<Eigen::Index>(line)) *= factor;
    return s;
  }

  /// Changes whenever any reactance or service flag changes.
  std::uint64_t fingerprint() const {
    std::vector<unsigned char> bytes;
    bytes.reserve(static_cast<std::size_t>(reactance.size()) * (sizeof(double) + 1));
    for (Eigen::Index i = 0; i < reactance.size(); ++i) {
      const double x = static_cast<double>(reactance(i));
      const auto* p = reinterpret_cast<const unsigned char*>(&x);
      bytes.insert(bytes.end(), p, p + sizeof x);
      bytes.push_back(in_service[static_cast<std::size_t>(i)] ? 1 : 0);
    }
    return fnv1a(bytes);
  }
};

/// Bus susceptance matrix with the slack row and column removed, factorized
/// once (sparse LDL^T) and reused for every right-hand side. Immutable and
/// safe to share between threads; each solve allocates its own workspace.
template <typename Scalar>
class SusceptanceSystem {
 public:
  using SparseMatrix = Eigen::SparseMatrix<Scalar>;
  using Solver = Eigen::SimplicialLDLT<SparseMatrix>;

  const SparseMatrix& reduced_matrix() const { return reduced_; }
  const BranchState<Scalar>& branches() const { return branches_; }

  BusIndex slack_index() const { return slack_; }
  std::size_t bus_count() const { return reduced_index_.size(); }
  std::size_t line_count() const { return endpoints_.size(); }
  BusIndex from_index(LineIndex l) const { return endpoints_[l][0]; }
  BusIndex to_index(LineIndex l) const { return endpoints_[l][1]; }
  double base_mva() const { return base_mva_; }
  std::uint64_t fingerprint() const { return fingerprint_; }

  /// Position of `bus` in the reduced system, -1 for the slack bus.
  Eigen::Index reduced_index(BusIndex bus) const { return reduced_index_[bus]; }

  /// B_red^{-1} rhs on the reduced (slack-free) coordinates.
  VectorX<Scalar> solve_reduced(const VectorX<Scalar>& rhs) const {
    VectorX<Scalar> x = solver_->solve(rhs);
    if (solver_->info() != Eigen::Success) throw SolverError("susceptance back-substitution failed");
    return x;
  }

  /// Full bus-angle vector (radians, slack = 0) for per-unit injections.
  VectorX<Scalar> angles(const VectorX<Scalar>& injections_pu) const {
    VectorX<Scalar> reduced_rhs(static_cast<Eigen::Index>(bus_count() - 1));
    for (BusIndex b = 0; b < bus_count(); ++b)
      if (reduced_index_[b] >= 0) reduced_rhs(reduced_index_[b]) = injections_pu(static_cast<Eigen::Index>(b));
    const VectorX<Scalar> reduced_theta =
        bus_count() > 1 ? solve_reduced(reduced_rhs) : VectorX<Scalar>();
    VectorX<Scalar> theta = VectorX<Scalar>::Zero(static_cast<Eigen::Index>(bus_count()));
    for (BusIndex b = 0; b < bus_count(); ++b)
      if (reduced_index_[b] >= 0) theta(static_cast<Eigen::Index>(b)) = reduced_theta(reduced_index_[b]);
    return theta;
  }

  /// MW flow on each line (from -> to) for bus angles `theta`.
  VectorX<Scalar> line_flows(const VectorX<Scalar>& theta) const {
    VectorX<Scalar> flows = VectorX<Scalar>::Zero(static_cast<Eigen::Index>(line_count()));
    for (LineIndex l = 0; l < line_count(); ++l) {
      if (!branches_.in_service[l]) continue;
      const auto i = static_cast<Eigen::Index>(l);
      flows(i) = (theta(static_cast<Eigen::Index>(endpoints_[l][0])) -
                  theta(static_cast<Eigen::Index>(endpoints_[l][1]))) /
                 branches_.reactance(i) * static_cast<Scalar>(base_mva_);
    }
    return flows;
  }

  /// Line flows (lines x m, MW) for m columns of MW injections in one batched
  /// back-substitution. Balance is not checked here.
  MatrixX<Scalar> flows_batch(const MatrixX<Scalar>& injections_mw) const {
    const Eigen::Index m = injections_mw.cols();
    const auto scale = static_cast<Scalar>(base_mva_);
    MatrixX<Scalar> rhs(static_cast<Eigen::Index>(bus_count()) - 1, m);
    for (BusIndex b = 0; b < bus_count(); ++b)
      if (reduced_index_[b] >= 0) rhs.row(reduced_index_[b]) = injections_mw.row(static_cast<Eigen::Index>(b)) / scale;
    MatrixX<Scalar> theta = rhs.rows() > 0 ? MatrixX<Scalar>(solver_->solve(rhs)) : rhs;
    MatrixX<Scalar> flows = MatrixX<Scalar>::Zero(static_cast<Eigen::Index>(line_count()), m);
    for (LineIndex l = 0; l < line_count(); ++l) {
      if (!branches_.in_service[l]) continue;
      const Eigen::Index f = reduced_index_[endpoints_[l][0]];
      const Eigen::Index t = reduced_index_[endpoints_[l][1]];
      const Scalar k = scale / branches_.reactance(static_cast<Eigen::Index>(l));
      auto row = flows.row(static_cast<Eigen::Index>(l));
      if (f >= 0) row += theta.row(f) * k;
      if (t >= 0) row -= theta.row(t) * k;
    }
    return flows;
  }

 private:
  template <typename S>
  friend SusceptanceSystem<S> build_system(const NetworkModel&, const BranchState<S>&);

  SparseMatrix reduced_;
  BranchState<Scalar> branches_;
  std::vector<Eigen::Index> reduced_index_;
  std::vector<std::array<BusIndex, 2>> endpoints_;
  BusIndex slack_ = 0;
  double base_mva_ = 100.0;
  std::uint64_t fingerprint_ = 0;
  std::shared_ptr<const Solver> solver_;
};

template <typename Scalar>
struct FlowSolution {
  VectorX<Scalar> angles_rad;  // slack = 0
  VectorX<Scalar> flows_mw;    // signed from_bus -> to_bus, 0 when out of service
  std::uint64_t topology = 0;  // fingerprint of the system that produced it
};

/// Unreduced bus susceptance matrix: B_ii = sum 1/x over lines at i,
/// B_ij = -sum 1/x over lines i-j.
template <typename Scalar>
Eigen::SparseMatrix<Scalar> full_susceptance_matrix(const NetworkModel& model,
                                                    const BranchState<Scalar>& branches) {
  const auto n = static_cast<Eigen::Index>(model.bus_count());
  std::vector<Eigen::Triplet<Scalar>> triplets;
  triplets.reserve(4 * model.line_count());
  for (LineIndex l = 0; l < model.line_count(); ++l) {
    if (!branches.in_service[l]) continue;
    const Scalar b = Scalar(1) / branches.reactance(static_cast<Eigen::Index>(l));
    const auto f = static_cast<Eigen::Index>(model.from_index(l));
    const auto t = static_cast<Eigen::Index>(model.to_index(l));
    triplets.emplace_back(f, f, b);
    triplets.emplace_back(t, t, b);
    triplets.emplace_back(f, t, -b);
    triplets.emplace_back(t, f, -b);
  }
  Eigen::SparseMatrix<Scalar> B(n, n);
  B.setFromTriplets(triplets.begin(), triplets.end());
  return B;
}

/// Assembles and factorizes the slack-reduced susceptance matrix. Throws
/// SolverError when the factorization is singular (a disconnected topology).
template <typename Scalar>
SusceptanceSystem<Scalar> build_system(const NetworkModel& model, const BranchState<Scalar>& branches) {
  for (LineIndex l = 0; l < model.line_count(); ++l)
    if (branches.in_service.at(l) && !(branches.reactance(static_cast<Eigen::Index>(l)) > Scalar(0)))
      throw SolverError("line " + model.lines()[l].id + " has non-positive reactance");

  SusceptanceSystem<Scalar> sys;
  sys.branches_ = branches;
  sys.slack_ = model.slack_index();
  sys.base_mva_ = model.system_base_mva();
  sys.fingerprint_ = branches.fingerprint();
  sys.reduced_index_.resize(model.bus_count());
  Eigen::Index next = 0;
  for (BusIndex b = 0; b < model.bus_count(); ++b)
    sys.reduced_index_[b] = b == sys.slack_ ? -1 : next++;
  sys.endpoints_.reserve(model.line_count());
  for (LineIndex l = 0; l < model.line_count(); ++l)
    sys.endpoints_.push_back({model.from_index(l), model.to_index(l)});

  std::vector<Eigen::Triplet<Scalar>> triplets;
  triplets.reserve(4 * model.line_count());
  Scalar max_entry(0);
  for (LineIndex l = 0; l < model.line_count(); ++l) {
    if (!branches.in_service[l]) continue;
    const Scalar b = Scalar(1) / branches.reactance(static_cast<Eigen::Index>(l));
    const auto f = sys.reduced_index_[model.from_index(l)];
    const auto t = sys.reduced_index_[model.to_index(l)];
    if (f >= 0) triplets.emplace_back(f, f, b);
    if (t >= 0) triplets.emplace_back(t, t, b);
    if (f >= 0 && t >= 0) {
      triplets.emplace_back(f, t, -b);
      triplets.emplace_back(t, f, -b);
    }
  }
  sys.reduced_.resize(next, next);
  sys.reduced_.setFromTriplets(triplets.begin(), triplets.end());
  for (int k = 0; k < sys.reduced_.outerSize(); ++k)
    for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(sys.reduced_, k); it; ++it)
      max_entry = std::max<Scalar>(max_entry, std::abs(it.value()));

  auto solver = std::make_shared<typename SusceptanceSystem<Scalar>::Solver>();
  if (next > 0) {
    solver->compute(sys.reduced_);
    if (solver->info() != Eigen::Success) throw SolverError("susceptance factorization failed");
    const Scalar min_pivot = solver->vectorD().cwiseAbs().minCoeff();
    if (!(min_pivot >= static_cast<Scalar>(kSingularPivotTol) * max_entry))
      throw SolverError("susceptance matrix is singular (network split by the current topology)");
  }
  sys.solver_ = std::move(solver);
  return sys;
}

template <typename Scalar = double>
SusceptanceSystem<Scalar> build_system(const NetworkModel& model) {
  return build_system(model, BranchState<Scalar>::from_model(model));
}

/// DC load flow for MW injections per bus. A net imbalance up to 1e-6 MW is
/// left to the slack bus; anything larger throws SolverError.
template <typename Scalar>
FlowSolution<Scalar> solve_flows(const SusceptanceSystem<Scalar>& system,
                                 const VectorX<Scalar>& injections_mw) {
  if (static_cast<std::size_t>(injections_mw.size()) != system.bus_count())
    throw SolverError("injection vector has " + std::to_string(injections_mw.size()) +
                      " entries for " + std::to_string(system.bus_count()) + " buses");
  const Scalar imbalance = injections_mw.sum();
  if (!(std::abs(imbalance) <= static_cast<Scalar>(kInjectionImbalanceTolMw)))
    throw SolverError("injections do not balance: net " + std::to_string(static_cast<double>(imbalance)) + " MW");
  FlowSolution<Scalar> sol;
  sol.angles_rad = system.angles(injections_mw / static_cast<Scalar>(system.base_mva()));
  sol.flows_mw = system.line_flows(sol.angles_rad);
  sol.topology = system.fingerprint();
  return sol;
}

/// Exact re-solve with `outaged` removed. Throws IslandingError naming the
/// buses cut off from the slack when the outage splits the network.
template <typename Scalar>
FlowSolution<Scalar> solve_with_outage(const NetworkModel& model, const VectorX<Scalar>& injections_mw,
                                       LineIndex outaged) {
  auto mask = model.in_service_mask();
  mask.at(outaged) = false;
  const auto separated = buses_separated_from_slack(model, mask);
  if (!separated.empty()) {
    std::vector<std::string> ids;
    for (BusIndex b : separated) ids.push_back(model.buses()[b].id);
    throw IslandingError(model.lines()[outaged].id, std::move(ids));
  }
  const auto system = build_system(model, BranchState<Scalar>::from_model(model).with_outage(outaged));
  return solve_flows(system, injections_mw);
}

/// Coordinate dump "row col value" (1-based bus positions of the reduced
/// matrix), one entry per line of output.
void write_matrix_coordinates(std::ostream& out, const Eigen::SparseMatrix<double>& matrix);

extern template class SusceptanceSystem<double>;
extern template SusceptanceSystem<double> build_system(const NetworkModel&, const BranchState<double>&);
extern template FlowSolution<double> solve_flows(const SusceptanceSystem<double>&, const VectorX<double>&);
extern template FlowSolution<double> solve_with_outage(const NetworkModel&, const VectorX<double>&, LineIndex);

}  // namespace pfcat
