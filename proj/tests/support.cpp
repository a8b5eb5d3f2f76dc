#include "support.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>

#include <sys/wait.h>
#include <sstream>

#include "pfcat/dcpf.hpp"

namespace oracle {

using namespace pfcat;

std::filesystem::path fixture_dir(const std::string& name) { return std::filesystem::path(PFCAT_FIXTURE_DIR) / name; }
std::filesystem::path cli_path() { return PFCAT_CLI_PATH; }

Fixture load_fixture(const std::string& name) {
  auto cfg = StudyConfig::load(fixture_dir(name) / "study.json");
  auto model = load_network({cfg.buses, cfg.lines, cfg.generators}, cfg.slack_bus, cfg.system_base_mva);
  auto profile = DemandProfile::load(cfg.demand, cfg.bus_shares, model);
  auto avail = cfg.res_availability ? ResAvailability::load(*cfg.res_availability, model) : ResAvailability::none(model);
  auto cal = SeasonCalendar::from_summer_months(cfg.parameters.summer_months, cfg.parameters.derate);
  return Fixture{std::move(cfg), std::move(model), std::move(profile), std::move(avail), std::move(cal)};
}

Screened screen_fixture(const Fixture& f, std::size_t workers) {
  const auto& p = f.config.parameters;
  const auto year = run_year(f.model, f.profile, f.availability, p.snsp_cap, workers);
  const auto sys = build_system(f.model);
  ScreeningOptions opt;
  opt.thresholds = {p.near_pct, p.overload_pct};
  opt.monitored = filter_monitored_lines(f.model, p.voltage_levels_kv);
  opt.workers = workers;
  Screened s{stage1_scan(year, f.profile, f.model, sys, f.calendar, opt), compute_shift_factors(sys, f.model), {}};
  auto s2 = stage2_scan(s.stage1.flows, s.factors.lodf, f.model, f.calendar, opt, s.stage1.records);
  s.records = s.stage1.records;
  s.records.insert(s.records.end(), s2.records.begin(), s2.records.end());
  sort_records(s.records);
  return s;
}

NetworkModel make_model(const std::vector<std::string>& bus_ids, const std::vector<L>& lines, const std::string& slack,
                        std::vector<Generator> gens) {
  std::vector<Bus> buses;
  for (const auto& id : bus_ids) buses.push_back(Bus{id, "Bus " + id, 110.0, "R"});
  std::vector<Line> ls;
  for (const auto& l : lines) ls.push_back(Line{l.id, l.from, l.to, l.x, l.rating, l.rating, l.in_service});
  return NetworkModel(std::move(buses), std::move(ls), std::move(gens), slack);
}

NetworkModel triangle(double r13, double r12, double r23) {
  return make_model({"1", "2", "3"}, {{"L1-3", "1", "3", 1.0, r13}, {"L1-2", "1", "2", 1.0, r12}, {"L2-3", "2", "3", 1.0, r23}},
                    "3", {thermal("G1", "1", 200.0, 30.0)});
}

Eigen::VectorXd dense_flows(const NetworkModel& model, const std::vector<bool>& in_service,
                            const Eigen::VectorXd& reactance, const Eigen::VectorXd& injections_mw) {
  const auto n = static_cast<Eigen::Index>(model.bus_count());
  std::map<std::string, Eigen::Index> pos;
  for (Eigen::Index i = 0; i < n; ++i) pos[model.buses()[static_cast<std::size_t>(i)].id] = i;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t l = 0; l < model.line_count(); ++l) {
    if (!in_service[l]) continue;
    const auto& line = model.lines()[l];
    const double b = 1.0 / reactance(static_cast<Eigen::Index>(l));
    const auto i = pos.at(line.from_bus), j = pos.at(line.to_bus);
    B(i, i) += b;
    B(j, j) += b;
    B(i, j) -= b;
    B(j, i) -= b;
  }
  const Eigen::Index s = pos.at(model.slack_bus());
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n; ++i)
    if (i != s) keep.push_back(i);
  const auto m = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd Br(m, m);
  Eigen::VectorXd p(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    p(a) = injections_mw(keep[static_cast<std::size_t>(a)]) / model.system_base_mva();
    for (Eigen::Index b = 0; b < m; ++b) Br(a, b) = B(keep[static_cast<std::size_t>(a)], keep[static_cast<std::size_t>(b)]);
  }
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
  if (m > 0) {
    const Eigen::VectorXd t = Br.fullPivLu().solve(p);
    for (Eigen::Index a = 0; a < m; ++a) theta(keep[static_cast<std::size_t>(a)]) = t(a);
  }
  Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.line_count()));
  for (std::size_t l = 0; l < model.line_count(); ++l) {
    if (!in_service[l]) continue;
    const auto& line = model.lines()[l];
    const auto li = static_cast<Eigen::Index>(l);
    f(li) = (theta(pos.at(line.from_bus)) - theta(pos.at(line.to_bus))) / reactance(li) * model.system_base_mva();
  }
  return f;
}

Eigen::VectorXd dense_flows(const NetworkModel& model, const Eigen::VectorXd& injections_mw) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(model.line_count()));
  for (std::size_t l = 0; l < model.line_count(); ++l) x(static_cast<Eigen::Index>(l)) = model.lines()[l].reactance_pu;
  return dense_flows(model, model.in_service_mask(), x, injections_mw);
}

namespace {

std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adjacency(const NetworkModel& model,
                                                                       const std::vector<bool>& mask) {
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(model.bus_count());
  for (std::size_t l = 0; l < model.line_count(); ++l) {
    if (!mask[l]) continue;
    const auto a = model.bus_index(model.lines()[l].from_bus), b = model.bus_index(model.lines()[l].to_bus);
    adj[a].push_back({b, l});
    adj[b].push_back({a, l});
  }
  return adj;
}

}  // namespace

std::vector<bool> reachable(const NetworkModel& model, const std::vector<bool>& mask, std::size_t start) {
  const auto adj = adjacency(model, mask);
  std::vector<bool> seen(model.bus_count(), false);
  std::vector<std::size_t> queue{start};
  seen[start] = true;
  for (std::size_t q = 0; q < queue.size(); ++q)
    for (const auto& [next, line] : adj[queue[q]])
      if (!seen[next]) seen[next] = true, queue.push_back(next);
  return seen;
}

std::vector<bool> bridges(const NetworkModel& model) {
  const auto adj = adjacency(model, model.in_service_mask());
  const std::size_t n = model.bus_count();
  std::vector<int> disc(n, -1), low(n, 0);
  std::vector<bool> out(model.line_count(), false);
  int timer = 0;
  std::function<void(std::size_t, std::size_t)> dfs = [&](std::size_t u, std::size_t via) {
    disc[u] = low[u] = timer++;
    for (const auto& [v, line] : adj[u]) {
      if (line == via) continue;
      if (disc[v] >= 0) {
        low[u] = std::min(low[u], disc[v]);
      } else {
        dfs(v, line);
        low[u] = std::min(low[u], low[v]);
        if (low[v] > disc[u]) out[line] = true;
      }
    }
  };
  for (std::size_t u = 0; u < n; ++u)
    if (disc[u] < 0) dfs(u, static_cast<std::size_t>(-1));
  return out;
}

Eigen::VectorXd random_injections(const NetworkModel& model, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::VectorXd p(static_cast<Eigen::Index>(model.bus_count()));
  const auto s = static_cast<Eigen::Index>(model.slack_index());
  for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = i == s ? 0.0 : u(rng);
  p(s) = -p.sum();
  return p;
}

int run_cli(const std::string& args, const std::filesystem::path& log) {
  const std::string cmd = "\"" + cli_path().string() + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("pfcat_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

namespace {

std::string without_timestamp(std::string text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line))
    if (line.find("\"generated_at\"") == std::string::npos) out += line + "\n";
  return out;
}

std::vector<std::string> relative_files(const std::filesystem::path& root) {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root))
    if (e.is_regular_file()) out.push_back(std::filesystem::relative(e.path(), root).generic_string());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::optional<std::string> first_tree_difference(const std::filesystem::path& a, const std::filesystem::path& b) {
  const auto fa = relative_files(a), fb = relative_files(b);
  if (fa != fb) return std::string("<file lists differ>");
  for (const auto& f : fa) {
    auto ta = read_file(a / f), tb = read_file(b / f);
    if (std::filesystem::path(f).filename() == "manifest.json") ta = without_timestamp(ta), tb = without_timestamp(tb);
    if (ta != tb) return f;
  }
  return std::nullopt;
}

}  // namespace oracle
