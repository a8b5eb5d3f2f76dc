#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pfcat/network.hpp"

namespace pfcat {

/// Hourly system demand and its fixed split over buses.
struct DemandProfile {
  std::vector<double> hourly_mw;  // one entry per hour of the year
  Eigen::VectorXd bus_share;      // per bus index; sums to 1

  /// Throws ValidationError unless 8760 non-negative hours and shares that
  /// are >= 0 and sum to 1 within 1e-9.
  void validate(const NetworkModel& model) const;

  static DemandProfile load(const std::filesystem::path& demand_csv,
                            const std::filesystem::path& bus_shares_csv, const NetworkModel& model);
};

/// Availability factor in [0,1] per renewable generator and hour. Stored
/// hour-major with one column per model generator (thermal columns unused).
class ResAvailability {
 public:
  ResAvailability() = default;
  ResAvailability(std::size_t hours, std::size_t generators);

  /// All-zero availability for a model; valid only if it has no renewables.
  static ResAvailability none(const NetworkModel& model);
  static ResAvailability load(const std::filesystem::path& csv_path, const NetworkModel& model);

  std::size_t hours() const { return hours_; }
  std::size_t generators() const { return generators_; }
  std::span<const double> hour(int h) const {
    return {factors_.data() + static_cast<std::size_t>(h) * generators_, generators_};
  }
  void set(int h, GeneratorIndex g, double factor) {
    factors_[static_cast<std::size_t>(h) * generators_ + g] = factor;
  }

 private:
  std::size_t hours_ = 0;
  std::size_t generators_ = 0;
  std::vector<double> factors_;
};

struct DispatchHour {
  int hour = 0;
  double demand_mw = 0.0;
  Eigen::VectorXd output_mw;  // per generator index
  double curtailed_mw = 0.0;  // available renewable energy not used
  double snsp = 0.0;          // non-synchronous output / demand
  bool feasible = true;
  double shortfall_mw = 0.0;  // demand left unserved when infeasible
  bool pmin_relaxed = false;  // marginal unit left below p_min (no renewables to back off)
};

struct DispatchYear {
  std::string scenario;
  double snsp_cap = 0.65;
  std::vector<DispatchHour> hours;  // index == hour

  std::vector<int> infeasible_hours() const;
};

/// Renewables first at availability, scaled pro-rata so non-synchronous
/// output stays within snsp_cap x demand; the remainder filled by thermal
/// units in ascending (srmc, id). If the marginal thermal unit ends below
/// p_min it is raised to p_min and the excess comes off the renewables.
/// A capacity shortfall yields feasible = false rather than an exception.
DispatchHour merit_order_dispatch(const NetworkModel& model, double demand_mw,
                                  std::span<const double> res_factors, double snsp_cap, int hour = 0);

/// 8760 independent hourly dispatches, evaluated on up to `workers` threads.
DispatchYear run_year(const NetworkModel& model, const DemandProfile& profile,
                      const ResAvailability& availability, double snsp_cap, std::size_t workers = 1,
                      std::string scenario = {});

/// injection(bus) = generation at bus - share(bus) x demand, in MW.
Eigen::VectorXd bus_injections(const NetworkModel& model, const DispatchHour& hour,
                               const DemandProfile& profile);

/// dispatch.csv (hour,generator,output_mw) and dispatch_summary.json.
void write_dispatch(const DispatchYear& year, const NetworkModel& model,
                    const std::filesystem::path& dir, const std::string& cache_key = {});

/// Reloads a dispatch written by write_dispatch; demand comes from `profile`.
DispatchYear read_dispatch(const std::filesystem::path& dir, const NetworkModel& model,
                           const DemandProfile& profile);

}  // namespace pfcat
