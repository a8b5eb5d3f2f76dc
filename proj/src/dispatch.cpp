#include "pfcat/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <stdexcept>

#include <json.hpp>

#include "pfcat/csv.hpp"
#include "pfcat/errors.hpp"
#include "pfcat/parallel.hpp"

namespace pfcat {
namespace {

using Kind = ValidationError::Kind;

std::vector<GeneratorIndex> merit_order(const NetworkModel& model) {
  std::vector<GeneratorIndex> order;
  for (GeneratorIndex g = 0; g < model.generator_count(); ++g)
    if (!model.generators()[g].is_renewable()) order.push_back(g);
  std::sort(order.begin(), order.end(), [&](GeneratorIndex a, GeneratorIndex b) {
    const auto& ga = model.generators()[a];
    const auto& gb = model.generators()[b];
    if (ga.srmc != gb.srmc) return ga.srmc < gb.srmc;
    return ga.id < gb.id;
  });
  return order;
}

DispatchHour dispatch_hour(const NetworkModel& model, const std::vector<GeneratorIndex>& order,
                           double demand_mw, std::span<const double> res_factors, double snsp_cap,
                           int hour) {
  if (!std::isfinite(demand_mw) || demand_mw < 0.0)
    throw std::invalid_argument("hour " + std::to_string(hour) + ": demand must be >= 0");
  if (!(snsp_cap > 0.0 && snsp_cap <= 1.0)) throw std::invalid_argument("snsp_cap must lie in (0, 1]");
  if (res_factors.size() != model.generator_count())
    throw std::invalid_argument("availability vector does not match generator count");

  const auto& gens = model.generators();
  DispatchHour h;
  h.hour = hour;
  h.demand_mw = demand_mw;
  h.output_mw = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(gens.size()));

  Eigen::VectorXd available = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(gens.size()));
  double res_available = 0.0;
  for (GeneratorIndex g = 0; g < gens.size(); ++g) {
    if (!gens[g].is_renewable()) continue;
    const double f = res_factors[g];
    if (!(f >= 0.0 && f <= 1.0))
      throw std::invalid_argument("generator " + gens[g].id + ": availability outside [0,1]");
    available(static_cast<Eigen::Index>(g)) = f * gens[g].p_max_mw;
    res_available += f * gens[g].p_max_mw;
  }

  double res_used = std::min(res_available, snsp_cap * demand_mw);
  double residual = demand_mw - res_used;

  double thermal_capacity = 0.0;
  for (GeneratorIndex g : order) thermal_capacity += gens[g].p_max_mw;

  if (residual > thermal_capacity + 1e-9) {
    h.feasible = false;
    h.shortfall_mw = residual - thermal_capacity;
    for (GeneratorIndex g : order) h.output_mw(static_cast<Eigen::Index>(g)) = gens[g].p_max_mw;
  } else {
    double remaining = residual;
    std::optional<GeneratorIndex> marginal;
    for (GeneratorIndex g : order) {
      if (remaining <= 0.0) break;
      const double out = std::min(gens[g].p_max_mw, remaining);
      h.output_mw(static_cast<Eigen::Index>(g)) = out;
      remaining -= out;
      if (out > 0.0) marginal = g;
    }
    if (marginal) {
      const auto m = static_cast<Eigen::Index>(*marginal);
      const double excess = gens[*marginal].p_min_mw - h.output_mw(m);
      if (excess > 0.0) {
        if (excess <= res_used) {
          res_used -= excess;
          h.output_mw(m) = gens[*marginal].p_min_mw;
        } else {
          h.pmin_relaxed = true;
        }
      }
    }
  }

  if (res_available > 0.0) {
    const double scale = res_used / res_available;
    for (GeneratorIndex g = 0; g < gens.size(); ++g)
      if (gens[g].is_renewable())
        h.output_mw(static_cast<Eigen::Index>(g)) = available(static_cast<Eigen::Index>(g)) * scale;
  }
  h.curtailed_mw = res_available - res_used;
  h.snsp = demand_mw > 0.0 ? res_used / demand_mw : 0.0;
  return h;
}

}  // namespace

void DemandProfile::validate(const NetworkModel& model) const {
  if (hourly_mw.size() != static_cast<std::size_t>(kHoursPerYear))
    throw ValidationError(Kind::kInvalidValue, "demand profile must cover 8760 hours, got " +
                                                   std::to_string(hourly_mw.size()));
  for (std::size_t h = 0; h < hourly_mw.size(); ++h)
    if (!std::isfinite(hourly_mw[h]) || hourly_mw[h] < 0.0)
      throw ValidationError(Kind::kInvalidValue, "hour " + std::to_string(h) + ": demand must be >= 0");
  if (static_cast<std::size_t>(bus_share.size()) != model.bus_count())
    throw ValidationError(Kind::kInvalidValue, "bus share vector does not match bus count");
  if ((bus_share.array() < 0.0).any())
    throw ValidationError(Kind::kInvalidValue, "bus shares must be >= 0");
  if (std::abs(bus_share.sum() - 1.0) > 1e-9)
    throw ValidationError(Kind::kInvalidValue,
                          "bus shares must sum to 1 (got " + csv::format_number(bus_share.sum()) + ")");
}

DemandProfile DemandProfile::load(const std::filesystem::path& demand_csv,
                                  const std::filesystem::path& bus_shares_csv,
                                  const NetworkModel& model) {
  DemandProfile p;
  const auto dt = csv::Table::read(demand_csv);
  dt.require_header({"hour", "demand_mw"});
  p.hourly_mw.assign(static_cast<std::size_t>(kHoursPerYear), 0.0);
  std::vector<bool> seen(static_cast<std::size_t>(kHoursPerYear), false);
  for (const auto& r : dt.rows()) {
    const long h = dt.integer(r, 0);
    if (h < 0 || h >= kHoursPerYear) throw ParseError(dt.source(), r.line, "hour outside [0, 8760)");
    if (seen[static_cast<std::size_t>(h)]) throw ParseError(dt.source(), r.line, "hour listed twice");
    seen[static_cast<std::size_t>(h)] = true;
    p.hourly_mw[static_cast<std::size_t>(h)] = dt.number(r, 1);
  }
  if (dt.rows().size() != static_cast<std::size_t>(kHoursPerYear))
    throw ValidationError(Kind::kInvalidValue, dt.source() + ": expected 8760 hourly rows, got " +
                                                   std::to_string(dt.rows().size()));

  const auto st = csv::Table::read(bus_shares_csv);
  st.require_header({"bus", "share"});
  p.bus_share = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.bus_count()));
  std::vector<bool> listed(model.bus_count(), false);
  for (const auto& r : st.rows()) {
    const auto b = model.find_bus(st.text(r, 0));
    if (!b)
      throw ValidationError(Kind::kDanglingReference,
                            st.source() + ":" + std::to_string(r.line) + ": unknown bus '" + st.text(r, 0) + "'",
                            {st.text(r, 0)});
    if (listed[*b]) throw ParseError(st.source(), r.line, "bus listed twice");
    listed[*b] = true;
    p.bus_share(static_cast<Eigen::Index>(*b)) = st.number(r, 1);
  }
  p.validate(model);
  return p;
}

ResAvailability::ResAvailability(std::size_t hours, std::size_t generators)
    : hours_(hours), generators_(generators), factors_(hours * generators, 0.0) {}

ResAvailability ResAvailability::none(const NetworkModel& model) {
  for (const auto& g : model.generators())
    if (g.is_renewable())
      throw ValidationError(Kind::kMissingInput,
                            "renewable generator " + g.id + " has no availability data", {g.id});
  return ResAvailability(static_cast<std::size_t>(kHoursPerYear), model.generator_count());
}

ResAvailability ResAvailability::load(const std::filesystem::path& csv_path, const NetworkModel& model) {
  const auto t = csv::Table::read(csv_path);
  if (t.header().empty() || t.header()[0] != "hour")
    throw ParseError(t.source(), 1, "first column must be 'hour'");
  std::vector<GeneratorIndex> cols;
  std::vector<bool> covered(model.generator_count(), false);
  for (std::size_t c = 1; c < t.header().size(); ++c) {
    const auto g = model.find_generator(t.header()[c]);
    if (!g)
      throw ValidationError(Kind::kDanglingReference,
                            t.source() + ": unknown generator column '" + t.header()[c] + "'",
                            {t.header()[c]});
    if (!model.generators()[*g].is_renewable())
      throw ValidationError(Kind::kInvalidValue,
                            t.source() + ": generator " + t.header()[c] + " is not wind or solar",
                            {t.header()[c]});
    if (covered[*g]) throw ParseError(t.source(), 1, "generator column listed twice");
    covered[*g] = true;
    cols.push_back(*g);
  }
  for (GeneratorIndex g = 0; g < model.generator_count(); ++g)
    if (model.generators()[g].is_renewable() && !covered[g])
      throw ValidationError(Kind::kMissingInput,
                            t.source() + ": no availability column for generator " + model.generators()[g].id,
                            {model.generators()[g].id});

  ResAvailability a(static_cast<std::size_t>(kHoursPerYear), model.generator_count());
  std::vector<bool> seen(static_cast<std::size_t>(kHoursPerYear), false);
  for (const auto& r : t.rows()) {
    const long h = t.integer(r, 0);
    if (h < 0 || h >= kHoursPerYear) throw ParseError(t.source(), r.line, "hour outside [0, 8760)");
    if (seen[static_cast<std::size_t>(h)]) throw ParseError(t.source(), r.line, "hour listed twice");
    seen[static_cast<std::size_t>(h)] = true;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const double f = t.number(r, c + 1);
      if (f < 0.0 || f > 1.0) throw ParseError(t.source(), r.line, "availability outside [0,1]");
      a.set(static_cast<int>(h), cols[c], f);
    }
  }
  if (t.rows().size() != static_cast<std::size_t>(kHoursPerYear))
    throw ValidationError(Kind::kInvalidValue, t.source() + ": expected 8760 hourly rows, got " +
                                                   std::to_string(t.rows().size()));
  return a;
}

std::vector<int> DispatchYear::infeasible_hours() const {
  std::vector<int> out;
  for (const auto& h : hours)
    if (!h.feasible) out.push_back(h.hour);
  return out;
}

DispatchHour merit_order_dispatch(const NetworkModel& model, double demand_mw,
                                  std::span<const double> res_factors, double snsp_cap, int hour) {
  return dispatch_hour(model, merit_order(model), demand_mw, res_factors, snsp_cap, hour);
}

DispatchYear run_year(const NetworkModel& model, const DemandProfile& profile,
                      const ResAvailability& availability, double snsp_cap, std::size_t workers,
                      std::string scenario) {
  if (profile.hourly_mw.size() != static_cast<std::size_t>(kHoursPerYear))
    throw ValidationError(Kind::kInvalidValue, "demand profile covers " +
                                                   std::to_string(profile.hourly_mw.size()) + " hours, need 8760");
  if (availability.hours() != static_cast<std::size_t>(kHoursPerYear) ||
      availability.generators() != model.generator_count())
    throw ValidationError(Kind::kInvalidValue, "availability data does not cover 8760 hours for every generator");

  const auto order = merit_order(model);
  DispatchYear year;
  year.scenario = std::move(scenario);
  year.snsp_cap = snsp_cap;
  year.hours.resize(static_cast<std::size_t>(kHoursPerYear));
  parallel_chunks(year.hours.size(), workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t h = begin; h < end; ++h) {
      const int hour = static_cast<int>(h);
      year.hours[h] = dispatch_hour(model, order, profile.hourly_mw[h], availability.hour(hour), snsp_cap, hour);
    }
  });
  return year;
}

Eigen::VectorXd bus_injections(const NetworkModel& model, const DispatchHour& hour,
                               const DemandProfile& profile) {
  Eigen::VectorXd inj = -profile.bus_share * hour.demand_mw;
  for (GeneratorIndex g = 0; g < model.generator_count(); ++g)
    inj(static_cast<Eigen::Index>(model.generator_bus(g))) += hour.output_mw(static_cast<Eigen::Index>(g));
  return inj;
}

void write_dispatch(const DispatchYear& year, const NetworkModel& model,
                    const std::filesystem::path& dir, const std::string& cache_key) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "dispatch.csv", std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / "dispatch.csv").string());
    csv::write_row(out, {"hour", "generator", "output_mw"});
    for (const auto& h : year.hours)
      for (GeneratorIndex g = 0; g < model.generator_count(); ++g)
        csv::write_row(out, {std::to_string(h.hour), model.generators()[g].id,
                             csv::format_number(h.output_mw(static_cast<Eigen::Index>(g)))});
  }
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["scenario"] = year.scenario;
  j["snsp_cap"] = year.snsp_cap;
  j["hours"] = year.hours.size();
  std::vector<int> relaxed;
  std::vector<double> curtail, snsp;
  double total_curtail = 0.0;
  for (const auto& h : year.hours) {
    if (h.pmin_relaxed) relaxed.push_back(h.hour);
    curtail.push_back(h.curtailed_mw);
    snsp.push_back(h.snsp);
    total_curtail += h.curtailed_mw;
  }
  const auto infeasible = year.infeasible_hours();
  j["feasible_hours"] = year.hours.size() - infeasible.size();
  j["infeasible_hours"] = infeasible;
  j["pmin_relaxed_hours"] = relaxed;
  j["total_curtailment_mwh"] = total_curtail;
  j["curtailment_mw"] = curtail;
  j["snsp"] = snsp;
  if (!cache_key.empty()) j["cache_key"] = cache_key;
  std::ofstream out(dir / "dispatch_summary.json", std::ios::binary);
  if (!out) throw Error("cannot write " + (dir / "dispatch_summary.json").string());
  out << j.dump(2) << '\n';
}

DispatchYear read_dispatch(const std::filesystem::path& dir, const NetworkModel& model,
                           const DemandProfile& profile) {
  std::ifstream in(dir / "dispatch_summary.json");
  if (!in)
    throw ValidationError(Kind::kMissingInput, "no dispatch summary in " + dir.string(),
                          {(dir / "dispatch_summary.json").string()});
  const auto j = nlohmann::json::parse(in);

  DispatchYear year;
  year.scenario = j.value("scenario", "");
  year.snsp_cap = j.at("snsp_cap").get<double>();
  year.hours.resize(static_cast<std::size_t>(kHoursPerYear));
  const auto curtail = j.at("curtailment_mw").get<std::vector<double>>();
  const auto snsp = j.at("snsp").get<std::vector<double>>();
  if (curtail.size() != year.hours.size() || snsp.size() != year.hours.size())
    throw ValidationError(Kind::kInvalidValue, "dispatch summary does not cover 8760 hours");
  for (std::size_t h = 0; h < year.hours.size(); ++h) {
    auto& dh = year.hours[h];
    dh.hour = static_cast<int>(h);
    dh.demand_mw = profile.hourly_mw.at(h);
    dh.output_mw = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.generator_count()));
    dh.curtailed_mw = curtail[h];
    dh.snsp = snsp[h];
  }
  for (int h : j.at("infeasible_hours").get<std::vector<int>>()) year.hours.at(static_cast<std::size_t>(h)).feasible = false;
  for (int h : j.at("pmin_relaxed_hours").get<std::vector<int>>()) year.hours.at(static_cast<std::size_t>(h)).pmin_relaxed = true;

  const auto t = csv::Table::read(dir / "dispatch.csv");
  t.require_header({"hour", "generator", "output_mw"});
  for (const auto& r : t.rows()) {
    const long h = t.integer(r, 0);
    if (h < 0 || h >= kHoursPerYear) throw ParseError(t.source(), r.line, "hour outside [0, 8760)");
    const auto g = model.find_generator(t.text(r, 1));
    if (!g) throw ParseError(t.source(), r.line, "unknown generator '" + t.text(r, 1) + "'");
    year.hours[static_cast<std::size_t>(h)].output_mw(static_cast<Eigen::Index>(*g)) = t.number(r, 2);
  }
  for (auto& dh : year.hours)
    if (!dh.feasible) dh.shortfall_mw = std::max(0.0, dh.demand_mw - dh.output_mw.sum());
  return year;
}

}  // namespace pfcat
