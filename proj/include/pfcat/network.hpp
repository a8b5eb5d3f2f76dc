#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pfcat {

using BusIndex = std::size_t;
using LineIndex = std::size_t;
using GeneratorIndex = std::size_t;

inline constexpr int kHoursPerYear = 8760;

struct Bus {
  std::string id;
  std::string name;
  double voltage_kv = 0.0;
  std::string region;
};

/// Series-reactance branch. Reactance is per-unit on the system MVA base.
struct Line {
  std::string id;
  std::string from_bus;
  std::string to_bus;
  double reactance_pu = 0.0;
  double rating_summer_mw = 0.0;
  double rating_winter_mw = 0.0;
  bool in_service = true;
};

enum class GeneratorKind { kThermal, kWind, kSolar };

std::string_view to_string(GeneratorKind kind);
std::optional<GeneratorKind> parse_generator_kind(std::string_view text);

struct Generator {
  std::string id;
  std::string bus;
  GeneratorKind kind = GeneratorKind::kThermal;
  double p_max_mw = 0.0;
  double p_min_mw = 0.0;
  double srmc = 0.0;
  bool synchronous = true;

  bool is_renewable() const { return kind != GeneratorKind::kThermal; }
};

/// Validated, immutable grid description. Construction throws
/// ValidationError on any broken invariant, including a network that is not
/// connected over its in-service lines.
class NetworkModel {
 public:
  NetworkModel(std::vector<Bus> buses, std::vector<Line> lines, std::vector<Generator> generators,
               std::string slack_bus, double system_base_mva = 100.0);

  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Line>& lines() const { return lines_; }
  const std::vector<Generator>& generators() const { return generators_; }

  std::size_t bus_count() const { return buses_.size(); }
  std::size_t line_count() const { return lines_.size(); }
  std::size_t generator_count() const { return generators_.size(); }

  const std::string& slack_bus() const { return buses_[slack_].id; }
  BusIndex slack_index() const { return slack_; }
  double system_base_mva() const { return base_mva_; }

  std::optional<BusIndex> find_bus(std::string_view id) const;
  std::optional<LineIndex> find_line(std::string_view id) const;
  std::optional<GeneratorIndex> find_generator(std::string_view id) const;
  BusIndex bus_index(std::string_view id) const;
  LineIndex line_index(std::string_view id) const;

  BusIndex from_index(LineIndex l) const { return endpoints_[l][0]; }
  BusIndex to_index(LineIndex l) const { return endpoints_[l][1]; }
  BusIndex generator_bus(GeneratorIndex g) const { return generator_bus_[g]; }

  /// Lines report the region of their from-bus.
  const std::string& line_region(LineIndex l) const { return buses_[from_index(l)].region; }

  std::vector<bool> in_service_mask() const;

 private:
  std::vector<Bus> buses_;
  std::vector<Line> lines_;
  std::vector<Generator> generators_;
  BusIndex slack_ = 0;
  double base_mva_ = 100.0;
  std::unordered_map<std::string, BusIndex> bus_by_id_;
  std::unordered_map<std::string, LineIndex> line_by_id_;
  std::unordered_map<std::string, GeneratorIndex> gen_by_id_;
  std::vector<std::array<BusIndex, 2>> endpoints_;
  std::vector<BusIndex> generator_bus_;
};

/// Component label per bus over the lines whose mask entry is true.
/// Labels are dense, assigned in order of first appearance by bus index.
std::vector<std::size_t> connected_components(std::size_t bus_count,
                                              std::span<const std::array<BusIndex, 2>> edges);
std::vector<std::size_t> connected_components(const NetworkModel& model,
                                              const std::vector<bool>& line_mask);

/// Buses not in the slack bus's component under `line_mask`, ascending.
std::vector<BusIndex> buses_separated_from_slack(const NetworkModel& model,
                                                 const std::vector<bool>& line_mask);

struct NetworkFiles {
  std::filesystem::path buses;
  std::filesystem::path lines;
  std::filesystem::path generators;
};

/// Reads the three CSV files. Without an explicit slack the first bus in
/// buses.csv is used.
NetworkModel load_network(const NetworkFiles& files, std::optional<std::string> slack_bus = {},
                          double system_base_mva = 100.0);

/// Writes buses.csv, lines.csv and generators.csv into `dir`.
NetworkFiles write_network(const NetworkModel& model, const std::filesystem::path& dir);

enum class Season { kSummer, kWinter };

/// Season per hour of a 365-day year plus the rating derate. The default
/// calendar is summer April-September, winter October-March, derate 10%.
class SeasonCalendar {
 public:
  SeasonCalendar();
  SeasonCalendar(std::vector<Season> seasons, double derate_factor);

  /// `summer_months` holds calendar months 1..12.
  static SeasonCalendar from_summer_months(std::span<const int> summer_months,
                                           double derate_factor = 0.10);

  Season season(int hour) const;
  double derate_factor() const { return derate_; }

 private:
  std::vector<Season> seasons_;
  double derate_ = 0.10;
};

/// Month 1..12 for an hour of the (non-leap) study year.
int month_of_hour(int hour);

/// Seasonal rating scaled by (1 - derate). Throws std::out_of_range for an
/// hour outside [0, 8760).
double effective_rating(const Line& line, int hour, const SeasonCalendar& calendar);

/// In-service lines whose endpoint buses both sit at one of `voltage_levels`
/// (kV, matched to 1e-6). Warns when the result is empty.
std::vector<LineIndex> filter_monitored_lines(const NetworkModel& model,
                                              std::span<const double> voltage_levels);

}  // namespace pfcat
