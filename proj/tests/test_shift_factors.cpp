#include <doctest.h>

#include <sstream>

#include "pfcat/shift_factors.hpp"
#include "support.hpp"

using namespace pfcat;

TEST_SUITE("shift_factors") {

TEST_CASE("two-bus PTDF") {
  const auto m = oracle::make_model({"1", "2"}, {{"a", "1", "2"}}, "2");
  const auto p = compute_ptdf(build_system(m));
  CHECK(p(0, 0) == doctest::Approx(1.0));
  CHECK(p(0, 1) == 0.0);
}

TEST_CASE("triangle PTDF from the current divider and a dense solve") {
  const auto m = oracle::triangle();
  const auto p = compute_ptdf(build_system(m));
  CHECK(p(0, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(p(1, 0) == doctest::Approx(1.0 / 3.0));
  for (LineIndex l = 0; l < 3; ++l) CHECK(p(l, 2) == 0.0);
  for (BusIndex b = 0; b < 3; ++b) {
    Eigen::VectorXd inj = Eigen::VectorXd::Zero(3);
    inj(static_cast<Eigen::Index>(b)) += 1.0;
    inj(2) -= 1.0;
    const auto dense = oracle::dense_flows(m, inj);
    for (LineIndex l = 0; l < 3; ++l) CHECK(p(l, b) == doctest::Approx(dense(static_cast<Eigen::Index>(l))));
  }
}

TEST_CASE("per-bus and per-line routes agree") {
  for (const char* name : {"mesh6", "case30", "figure5"}) {
    const auto f = oracle::load_fixture(name);
    const auto sys = build_system(f.model);
    const auto a = compute_ptdf(sys, PtdfMethod::kPerBus);
    const auto b = compute_ptdf(sys, PtdfMethod::kPerLine);
    CHECK((a.values - b.values).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("triangle LODF") {
  const auto m = oracle::triangle();
  const auto sf = compute_shift_factors(build_system(m), m);
  CHECK(sf.lodf(1, 0) == doctest::Approx(1.0));
  for (LineIndex k = 0; k < 3; ++k) CHECK(sf.lodf(k, k) == -1.0);
  const Eigen::VectorXd base = Eigen::Vector3d(60, 30, 30);
  const auto post = post_contingency_flows(base, sf.lodf, 0);
  CHECK(post(0) == 0.0);
  CHECK(post(1) == doctest::Approx(90.0));
}

TEST_CASE("radial bridge is marked islanding") {
  const auto m = oracle::make_model({"1", "2", "3"}, {{"a", "1", "2"}, {"b", "2", "3"}, {"c", "1", "2"}}, "1");
  const auto lodf = compute_shift_factors(build_system(m), m).lodf;
  CHECK(lodf.islanding[1]);
  CHECK_FALSE(lodf.islanding[0]);
  CHECK(lodf.islanded_buses[1] == std::vector<std::string>{"3"});
  CHECK(lodf.outage_candidates() == std::vector<LineIndex>{0, 2});
}

TEST_CASE("bridges from LODF match Tarjan on fixtures") {
  for (const char* name : {"radial2", "figure5", "figure6", "mesh6", "case30"}) {
    const auto f = oracle::load_fixture(name);
    const auto lodf = compute_shift_factors(build_system(f.model), f.model).lodf;
    const auto bridges = oracle::bridges(f.model);
    for (LineIndex k = 0; k < f.model.line_count(); ++k) {
      CHECK_MESSAGE(lodf.islanding[k] == bridges[k], name << " line " << f.model.lines()[k].id);
      if (lodf.islanding[k]) {
        CHECK(std::isnan(lodf(0, k)));
        CHECK_THROWS_AS(post_contingency_flows(Eigen::VectorXd(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(f.model.line_count()))), lodf, k),
                        IslandingError);
      }
    }
  }
}

TEST_CASE("property: LODF superposition equals exact re-solve") {
  std::mt19937_64 rng(17);
  for (const char* name : {"triangle", "mesh6", "case30"}) {
    const auto f = oracle::load_fixture(name);
    const auto sys = build_system(f.model);
    const auto lodf = compute_shift_factors(sys, f.model).lodf;
    for (int i = 0; i < 20; ++i) {
      const auto inj = oracle::random_injections(f.model, rng);
      const auto base = solve_flows(sys, inj);
      for (LineIndex k : lodf.outage_candidates()) {
        const auto post = post_contingency_flows(base, lodf, k);
        const auto exact = solve_with_outage(f.model, inj, k).flows_mw;
        const double scale = std::max(1.0, exact.cwiseAbs().maxCoeff());
        CHECK((post - exact).cwiseAbs().maxCoeff() <= 1e-6 * scale);
      }
    }
  }
}

TEST_CASE("property: PTDF is linear in injections") {
  const auto f = oracle::load_fixture("case30");
  const auto sys = build_system(f.model);
  const auto p = compute_ptdf(sys);
  std::mt19937_64 rng(23);
  for (int i = 0; i < 20; ++i) {
    const auto a = oracle::random_injections(f.model, rng);
    const auto b = oracle::random_injections(f.model, rng);
    const double s = std::uniform_real_distribution<double>(-3, 3)(rng);
    const Eigen::VectorXd combined = a + s * b;
    const Eigen::VectorXd predicted = p.values * a + s * (p.values * b);
    CHECK((predicted - solve_flows(sys, combined).flows_mw).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("zero pre-flow outage leaves flows unchanged") {
  const auto m = oracle::make_model(
      {"1", "2", "3", "4"}, {{"a", "1", "2"}, {"b", "2", "3"}, {"c", "3", "4"}, {"d", "4", "1"}, {"diag", "2", "4"}}, "3");
  const auto sys = build_system(m);
  const auto lodf = compute_shift_factors(sys, m).lodf;
  const auto base = solve_flows(sys, Eigen::VectorXd(Eigen::Vector4d(50, 0, -50, 0)));
  const auto post = post_contingency_flows(base, lodf, 4);
  CHECK((post - base.flows_mw).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("stale factors are refused") {
  const auto m = oracle::triangle();
  const auto lodf = compute_shift_factors(build_system(m), m).lodf;
  const auto changed = build_system(m, BranchState<double>::from_model(m).with_reactance_scale(0, 1.2));
  const auto sol = solve_flows(changed, Eigen::VectorXd(Eigen::Vector3d(90, 0, -90)));
  CHECK_THROWS_AS(post_contingency_flows(sol, lodf, 0), SolverError);
}

TEST_CASE("cache recomputes only on topology change") {
  const auto m = oracle::triangle();
  ShiftFactorCache cache;
  const auto s = BranchState<double>::from_model(m);
  cache.get(m, s);
  cache.get(m, s);
  CHECK(cache.recomputations() == 1);
  cache.get(m, s.with_reactance_scale(1, 1.3));
  CHECK(cache.recomputations() == 2);
}

TEST_CASE("audit exports") {
  const auto m = oracle::make_model({"1", "2", "3"}, {{"a", "1", "2"}, {"b", "2", "3"}, {"c", "1", "2"}}, "1");
  const auto sf = compute_shift_factors(build_system(m), m);
  std::ostringstream p, l;
  write_ptdf_csv(p, sf.ptdf, m);
  write_lodf_csv(l, sf.lodf, m);
  CHECK(p.str().rfind("line,bus,value", 0) == 0);
  CHECK(l.str().find("islanding") != std::string::npos);
}

}
