#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pfcat/dispatch.hpp"
#include "pfcat/network.hpp"
#include "pfcat/screening.hpp"
#include "pfcat/shift_factors.hpp"
#include "pfcat/study.hpp"

namespace oracle {

std::filesystem::path fixture_dir(const std::string& name);
std::filesystem::path cli_path();

/// A bundled fixture with everything a stage needs, loaded through the
/// library's own readers.
struct Fixture {
  pfcat::StudyConfig config;
  pfcat::NetworkModel model;
  pfcat::DemandProfile profile;
  pfcat::ResAvailability availability;
  pfcat::SeasonCalendar calendar;
};
Fixture load_fixture(const std::string& name);

/// Everything Stage 3 consumes for one fixture, computed via the library.
struct Screened {
  pfcat::Stage1Result stage1;
  pfcat::ShiftFactors<double> factors;
  std::vector<pfcat::OverloadRecord> records;  // stage 1 and 2, sorted
};
Screened screen_fixture(const Fixture& f, std::size_t workers = 1);

/// Line spec for building small models in tests.
struct L {
  std::string id, from, to;
  double x = 1.0;
  double rating = 1000.0;
  bool in_service = true;
};
pfcat::NetworkModel make_model(const std::vector<std::string>& bus_ids, const std::vector<L>& lines,
                               const std::string& slack, std::vector<pfcat::Generator> gens = {});

/// Three-bus triangle, all x = 1, slack bus 3. Lines in order 1-3, 1-2, 2-3.
pfcat::NetworkModel triangle(double r13 = 150.0, double r12 = 85.0, double r23 = 150.0);

/// Independent DC flows: dense B assembled here from the line list, slack
/// row and column dropped, solved by full-pivot LU. MW in, MW out.
Eigen::VectorXd dense_flows(const pfcat::NetworkModel& model, const std::vector<bool>& in_service,
                            const Eigen::VectorXd& reactance, const Eigen::VectorXd& injections_mw);
Eigen::VectorXd dense_flows(const pfcat::NetworkModel& model, const Eigen::VectorXd& injections_mw);

/// Breadth-first reachability from `start` over lines with mask true.
std::vector<bool> reachable(const pfcat::NetworkModel& model, const std::vector<bool>& mask, std::size_t start);

/// Bridges of the in-service graph by Tarjan's low-link, parallel lines
/// handled by skipping only the tree edge itself.
std::vector<bool> bridges(const pfcat::NetworkModel& model);

/// Balanced random injections: uniform in [-scale, scale] at every non-slack
/// bus, the slack takes the negative sum.
Eigen::VectorXd random_injections(const pfcat::NetworkModel& model, std::mt19937_64& rng, double scale = 100.0);

inline pfcat::Generator thermal(std::string id, std::string bus, double pmax, double srmc, double pmin = 0.0) {
  pfcat::Generator g;
  g.id = std::move(id);
  g.bus = std::move(bus);
  g.p_max_mw = pmax;
  g.p_min_mw = pmin;
  g.srmc = srmc;
  return g;
}

inline pfcat::Generator renewable(std::string id, std::string bus, double pmax,
                                  pfcat::GeneratorKind kind = pfcat::GeneratorKind::kWind) {
  pfcat::Generator g;
  g.id = std::move(id);
  g.bus = std::move(bus);
  g.kind = kind;
  g.p_max_mw = pmax;
  g.synchronous = false;
  return g;
}

/// Runs the CLI and returns its exit status. Output goes to `log`.
int run_cli(const std::string& args, const std::filesystem::path& log);

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

/// Byte-exact file comparison of two trees, ignoring manifest.json's
/// generated_at line. Returns the first differing relative path.
std::optional<std::string> first_tree_difference(const std::filesystem::path& a, const std::filesystem::path& b);

std::string read_file(const std::filesystem::path& p);

/// Re-aggregates report/overloads.csv and report/pfc_outcomes.csv with
/// plain string handling and compares every count in the other report files
/// and summary.json. `network_dir` holds the buses.csv and lines.csv used
/// for regions. Returns one message per mismatch.
std::vector<std::string> tie_out_mismatches(const std::filesystem::path& report_dir,
                                            const std::filesystem::path& network_dir);

}  // namespace oracle
