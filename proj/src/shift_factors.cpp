#include "pfcat/shift_factors.hpp"

#include <ostream>

#include "pfcat/csv.hpp"

namespace pfcat {

template PtdfMatrix<double> compute_ptdf(const SusceptanceSystem<double>&, PtdfMethod);
template LodfMatrix<double> compute_lodf(const PtdfMatrix<double>&, const NetworkModel&);

const ShiftFactors<double>& ShiftFactorCache::get(const NetworkModel& model,
                                                  const BranchState<double>& branches) {
  const auto key = branches.fingerprint();
  if (!cached_ || cached_->ptdf.topology != key) {
    cached_ = compute_shift_factors(build_system(model, branches), model);
    ++recomputations_;
  }
  return *cached_;
}

void write_ptdf_csv(std::ostream& out, const PtdfMatrix<double>& ptdf, const NetworkModel& model) {
  csv::write_row(out, {"line", "bus", "value"});
  for (LineIndex l = 0; l < model.line_count(); ++l)
    for (BusIndex b = 0; b < model.bus_count(); ++b)
      csv::write_row(out, {model.lines()[l].id, model.buses()[b].id, csv::format_number(ptdf(l, b))});
}

void write_lodf_csv(std::ostream& out, const LodfMatrix<double>& lodf, const NetworkModel& model) {
  csv::write_row(out, {"monitored_line", "outage_line", "value"});
  for (LineIndex l = 0; l < model.line_count(); ++l)
    for (LineIndex k = 0; k < model.line_count(); ++k) {
      if (!lodf.in_service[k]) continue;
      csv::write_row(out, {model.lines()[l].id, model.lines()[k].id,
                           lodf.islanding[k] ? "islanding" : csv::format_number(lodf(l, k))});
    }
}

}  // namespace pfcat
