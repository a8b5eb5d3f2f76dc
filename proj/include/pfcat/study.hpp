#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pfcat/report.hpp"

namespace pfcat {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitValidation = 2, kExitInfeasible = 3, kExitSolver = 4 };

/// One study: input files plus every tunable. Relative paths in the JSON
/// file resolve against the file's directory.
struct StudyConfig {
  std::string scenario;
  std::filesystem::path buses, lines, generators;
  std::filesystem::path demand, bus_shares;
  std::optional<std::filesystem::path> res_availability;
  std::optional<std::string> slack_bus;
  double system_base_mva = 100.0;
  StudyParameters parameters;
  std::size_t workers = 1;
  std::filesystem::path output_dir = "out";
  std::string report_formats = "csv,json,svg";

  /// Throws ValidationError for unknown keys, bad types or broken invariants.
  static StudyConfig load(const std::filesystem::path& path);
  static StudyConfig from_json_text(const std::string& text, const std::filesystem::path& base_dir);

  /// 0 < near < overload, 0 < pfc cap <= 100, tolerance > 0, and so on.
  void validate() const;
};

/// Runs pipeline stages against one output directory, reusing stage outputs
/// whose cache key (content hash of inputs plus relevant settings) matches.
/// Progress and per-region counts go to `log`.
class Study {
 public:
  Study(StudyConfig config, std::ostream& log);
  ~Study();

  int dispatch();
  int screen();
  int site_pfc();
  int report();
  int run_all();

  const StudyConfig& config() const { return config_; }
  std::filesystem::path stage_dir(const std::string& stage) const { return config_.output_dir / stage; }
  std::string dispatch_key();
  std::string screen_key();
  std::string config_hash();

  /// Stage recomputations performed by this instance (cache misses).
  int dispatch_runs() const { return dispatch_runs_; }
  int screen_runs() const { return screen_runs_; }

 private:
  struct Inputs;
  Inputs& inputs();
  void ensure_dispatch();
  void ensure_screen();

  StudyConfig config_;
  std::ostream& log_;
  std::unique_ptr<Inputs> inputs_;
  int dispatch_runs_ = 0;
  int screen_runs_ = 0;
};

/// Maps an exception escaping a stage to the documented exit code, after
/// writing a one-line diagnostic to `err`.
int exit_code_for(const std::exception& e, std::ostream& err);

}  // namespace pfcat
