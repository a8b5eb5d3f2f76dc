#include "pfcat/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

#include "pfcat/csv.hpp"
#include "pfcat/errors.hpp"
#include "pfcat/log.hpp"

namespace pfcat {
namespace {

using Kind = ValidationError::Kind;

[[noreturn]] void invalid(const std::string& what, std::vector<std::string> ids = {}) {
  throw ValidationError(Kind::kInvalidValue, what, std::move(ids));
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

template <typename T>
std::unordered_map<std::string, std::size_t> index_ids(const std::vector<T>& items,
                                                       std::string_view what) {
  std::unordered_map<std::string, std::size_t> out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].id.empty()) invalid(std::string(what) + " at position " + std::to_string(i) + " has an empty id");
    if (!out.emplace(items[i].id, i).second)
      throw ValidationError(Kind::kDuplicateId,
                            "duplicate " + std::string(what) + " id '" + items[i].id + "'",
                            {items[i].id});
  }
  return out;
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

std::string_view to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::kThermal: return "thermal";
    case GeneratorKind::kWind: return "wind";
    case GeneratorKind::kSolar: return "solar";
  }
  return "thermal";
}

std::optional<GeneratorKind> parse_generator_kind(std::string_view text) {
  if (text == "thermal") return GeneratorKind::kThermal;
  if (text == "wind") return GeneratorKind::kWind;
  if (text == "solar") return GeneratorKind::kSolar;
  return std::nullopt;
}

NetworkModel::NetworkModel(std::vector<Bus> buses, std::vector<Line> lines,
                           std::vector<Generator> generators, std::string slack_bus,
                           double system_base_mva)
    : buses_(std::move(buses)),
      lines_(std::move(lines)),
      generators_(std::move(generators)),
      base_mva_(system_base_mva) {
  if (buses_.empty()) invalid("network has no buses");
  if (!finite_positive(base_mva_)) invalid("system base must be positive");

  bus_by_id_ = index_ids(buses_, "bus");
  line_by_id_ = index_ids(lines_, "line");
  gen_by_id_ = index_ids(generators_, "generator");

  for (const auto& b : buses_)
    if (!finite_positive(b.voltage_kv)) invalid("bus " + b.id + ": voltage_kv must be > 0", {b.id});

  auto resolve = [&](const std::string& bus, const std::string& owner) {
    auto it = bus_by_id_.find(bus);
    if (it == bus_by_id_.end())
      throw ValidationError(Kind::kDanglingReference,
                            owner + " references unknown bus '" + bus + "'", {bus});
    return it->second;
  };

  endpoints_.reserve(lines_.size());
  for (const auto& l : lines_) {
    const BusIndex f = resolve(l.from_bus, "line " + l.id);
    const BusIndex t = resolve(l.to_bus, "line " + l.id);
    if (f == t) invalid("line " + l.id + ": from_bus equals to_bus", {l.id});
    if (!finite_positive(l.reactance_pu)) invalid("line " + l.id + ": reactance must be > 0", {l.id});
    if (!finite_positive(l.rating_summer_mw) || !finite_positive(l.rating_winter_mw))
      invalid("line " + l.id + ": ratings must be > 0", {l.id});
    endpoints_.push_back({f, t});
  }

  generator_bus_.reserve(generators_.size());
  for (const auto& g : generators_) {
    generator_bus_.push_back(resolve(g.bus, "generator " + g.id));
    if (!std::isfinite(g.p_min_mw) || !std::isfinite(g.p_max_mw) || g.p_min_mw < 0.0 ||
        g.p_min_mw > g.p_max_mw)
      invalid("generator " + g.id + ": need 0 <= p_min <= p_max", {g.id});
    if (!std::isfinite(g.srmc) || g.srmc < 0.0) invalid("generator " + g.id + ": srmc must be >= 0", {g.id});
    if (g.synchronous == g.is_renewable())
      invalid("generator " + g.id + ": wind/solar units must be non-synchronous and thermal units synchronous",
              {g.id});
  }

  auto slack = bus_by_id_.find(slack_bus);
  if (slack == bus_by_id_.end())
    throw ValidationError(Kind::kDanglingReference, "slack bus '" + slack_bus + "' does not exist",
                          {slack_bus});
  slack_ = slack->second;

  const auto separated = buses_separated_from_slack(*this, in_service_mask());
  if (!separated.empty()) {
    std::vector<std::string> ids;
    std::string list;
    for (BusIndex b : separated) {
      ids.push_back(buses_[b].id);
      list += (list.empty() ? "" : ", ") + buses_[b].id;
    }
    throw ValidationError(Kind::kDisconnected,
                          "network is disconnected; buses not reachable from slack: {" + list + "}",
                          std::move(ids));
  }
}

std::optional<BusIndex> NetworkModel::find_bus(std::string_view id) const {
  auto it = bus_by_id_.find(std::string(id));
  if (it == bus_by_id_.end()) return std::nullopt;
  return it->second;
}

std::optional<LineIndex> NetworkModel::find_line(std::string_view id) const {
  auto it = line_by_id_.find(std::string(id));
  if (it == line_by_id_.end()) return std::nullopt;
  return it->second;
}

std::optional<GeneratorIndex> NetworkModel::find_generator(std::string_view id) const {
  auto it = gen_by_id_.find(std::string(id));
  if (it == gen_by_id_.end()) return std::nullopt;
  return it->second;
}

BusIndex NetworkModel::bus_index(std::string_view id) const {
  if (auto b = find_bus(id)) return *b;
  throw ValidationError(Kind::kDanglingReference, "unknown bus '" + std::string(id) + "'",
                        {std::string(id)});
}

LineIndex NetworkModel::line_index(std::string_view id) const {
  if (auto l = find_line(id)) return *l;
  throw ValidationError(Kind::kDanglingReference, "unknown line '" + std::string(id) + "'",
                        {std::string(id)});
}

std::vector<bool> NetworkModel::in_service_mask() const {
  std::vector<bool> mask(lines_.size());
  for (std::size_t l = 0; l < lines_.size(); ++l) mask[l] = lines_[l].in_service;
  return mask;
}

std::vector<std::size_t> connected_components(std::size_t bus_count,
                                              std::span<const std::array<BusIndex, 2>> edges) {
  std::vector<std::size_t> parent(bus_count);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  for (const auto& e : edges) {
    const auto a = find_root(parent, e[0]);
    const auto b = find_root(parent, e[1]);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::size_t> label(bus_count);
  std::unordered_map<std::size_t, std::size_t> dense;
  for (std::size_t i = 0; i < bus_count; ++i) {
    const auto root = find_root(parent, i);
    label[i] = dense.emplace(root, dense.size()).first->second;
  }
  return label;
}

std::vector<std::size_t> connected_components(const NetworkModel& model,
                                              const std::vector<bool>& line_mask) {
  std::vector<std::array<BusIndex, 2>> edges;
  for (LineIndex l = 0; l < model.line_count(); ++l)
    if (line_mask.at(l)) edges.push_back({model.from_index(l), model.to_index(l)});
  return connected_components(model.bus_count(), edges);
}

std::vector<BusIndex> buses_separated_from_slack(const NetworkModel& model,
                                                 const std::vector<bool>& line_mask) {
  const auto label = connected_components(model, line_mask);
  const auto slack_label = label[model.slack_index()];
  std::vector<BusIndex> out;
  for (BusIndex b = 0; b < label.size(); ++b)
    if (label[b] != slack_label) out.push_back(b);
  return out;
}

NetworkModel load_network(const NetworkFiles& files, std::optional<std::string> slack_bus,
                          double system_base_mva) {
  const auto bt = csv::Table::read(files.buses);
  bt.require_header({"id", "name", "voltage_kv", "region"});
  std::vector<Bus> buses;
  for (const auto& r : bt.rows())
    buses.push_back(Bus{bt.text(r, 0), bt.text(r, 1), bt.number(r, 2), bt.text(r, 3)});

  const auto lt = csv::Table::read(files.lines);
  lt.require_header({"id", "from_bus", "to_bus", "reactance_pu", "rating_summer_mw",
                     "rating_winter_mw", "in_service"});
  std::vector<Line> lines;
  for (const auto& r : lt.rows())
    lines.push_back(Line{lt.text(r, 0), lt.text(r, 1), lt.text(r, 2), lt.number(r, 3),
                         lt.number(r, 4), lt.number(r, 5), lt.boolean(r, 6)});

  const auto gt = csv::Table::read(files.generators);
  gt.require_header({"id", "bus", "kind", "p_max_mw", "p_min_mw", "srmc", "synchronous"});
  std::vector<Generator> gens;
  for (const auto& r : gt.rows()) {
    const auto kind = parse_generator_kind(gt.text(r, 2));
    if (!kind)
      throw ParseError(gt.source(), r.line,
                       "column 'kind': expected thermal, wind or solar, got '" + gt.text(r, 2) + "'");
    gens.push_back(Generator{gt.text(r, 0), gt.text(r, 1), *kind, gt.number(r, 3), gt.number(r, 4),
                             gt.number(r, 5), gt.boolean(r, 6)});
  }

  if (buses.empty()) throw ParseError(bt.source(), 1, "no bus rows");
  std::string slack = slack_bus ? *slack_bus : buses.front().id;
  return NetworkModel(std::move(buses), std::move(lines), std::move(gens), std::move(slack),
                      system_base_mva);
}

NetworkFiles write_network(const NetworkModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  NetworkFiles files{dir / "buses.csv", dir / "lines.csv", dir / "generators.csv"};
  auto open = [](const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    return out;
  };
  using csv::format_number;
  {
    auto out = open(files.buses);
    csv::write_row(out, {"id", "name", "voltage_kv", "region"});
    for (const auto& b : model.buses())
      csv::write_row(out, {b.id, b.name, format_number(b.voltage_kv), b.region});
  }
  {
    auto out = open(files.lines);
    csv::write_row(out, {"id", "from_bus", "to_bus", "reactance_pu", "rating_summer_mw",
                         "rating_winter_mw", "in_service"});
    for (const auto& l : model.lines())
      csv::write_row(out, {l.id, l.from_bus, l.to_bus, format_number(l.reactance_pu),
                           format_number(l.rating_summer_mw), format_number(l.rating_winter_mw),
                           l.in_service ? "true" : "false"});
  }
  {
    auto out = open(files.generators);
    csv::write_row(out, {"id", "bus", "kind", "p_max_mw", "p_min_mw", "srmc", "synchronous"});
    for (const auto& g : model.generators())
      csv::write_row(out, {g.id, g.bus, std::string(to_string(g.kind)), format_number(g.p_max_mw),
                           format_number(g.p_min_mw), format_number(g.srmc),
                           g.synchronous ? "true" : "false"});
  }
  return files;
}

namespace {
constexpr std::array<int, 12> kDaysInMonth = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
}

int month_of_hour(int hour) {
  if (hour < 0 || hour >= kHoursPerYear)
    throw std::out_of_range("hour " + std::to_string(hour) + " outside [0, 8760)");
  int day = hour / 24;
  for (int m = 0; m < 12; ++m) {
    if (day < kDaysInMonth[m]) return m + 1;
    day -= kDaysInMonth[m];
  }
  return 12;
}

SeasonCalendar::SeasonCalendar() {
  static constexpr std::array<int, 6> kSummer = {4, 5, 6, 7, 8, 9};
  *this = from_summer_months(kSummer, 0.10);
}

SeasonCalendar::SeasonCalendar(std::vector<Season> seasons, double derate_factor)
    : seasons_(std::move(seasons)), derate_(derate_factor) {
  if (seasons_.size() != static_cast<std::size_t>(kHoursPerYear))
    invalid("season calendar must assign all 8760 hours");
  if (!(derate_ >= 0.0 && derate_ < 0.5)) invalid("derate factor must lie in [0, 0.5)");
}

SeasonCalendar SeasonCalendar::from_summer_months(std::span<const int> summer_months,
                                                  double derate_factor) {
  std::set<int> months;
  for (int m : summer_months) {
    if (m < 1 || m > 12) invalid("summer month " + std::to_string(m) + " outside 1..12");
    months.insert(m);
  }
  std::vector<Season> seasons(kHoursPerYear);
  for (int h = 0; h < kHoursPerYear; ++h)
    seasons[h] = months.count(month_of_hour(h)) ? Season::kSummer : Season::kWinter;
  return SeasonCalendar(std::move(seasons), derate_factor);
}

Season SeasonCalendar::season(int hour) const {
  if (hour < 0 || hour >= kHoursPerYear)
    throw std::out_of_range("hour " + std::to_string(hour) + " outside [0, 8760)");
  return seasons_[hour];
}

double effective_rating(const Line& line, int hour, const SeasonCalendar& calendar) {
  const double raw =
      calendar.season(hour) == Season::kSummer ? line.rating_summer_mw : line.rating_winter_mw;
  return raw * (1.0 - calendar.derate_factor());
}

std::vector<LineIndex> filter_monitored_lines(const NetworkModel& model,
                                              std::span<const double> voltage_levels) {
  if (voltage_levels.empty()) throw std::invalid_argument("voltage level filter is empty");
  auto listed = [&](double kv) {
    return std::any_of(voltage_levels.begin(), voltage_levels.end(),
                       [kv](double v) { return std::abs(v - kv) <= 1e-6; });
  };
  std::vector<LineIndex> out;
  for (LineIndex l = 0; l < model.line_count(); ++l) {
    if (!model.lines()[l].in_service) continue;
    if (listed(model.buses()[model.from_index(l)].voltage_kv) &&
        listed(model.buses()[model.to_index(l)].voltage_kv))
      out.push_back(l);
  }
  if (out.empty()) {
    std::string levels;
    for (double v : voltage_levels) levels += (levels.empty() ? "" : ", ") + csv::format_number(v);
    warn("no in-service lines at voltage level(s) {" + levels + "} kV; nothing will be monitored");
  }
  return out;
}

}  // namespace pfcat
