#include <doctest.h>

#include <numeric>

#include "pfcat/dispatch.hpp"
#include "support.hpp"

using namespace pfcat;

namespace {

// A generator set with three thermal tiers, one wind and one solar unit.
NetworkModel mixed_model() {
  return oracle::make_model({"1", "2"}, {{"a", "1", "2"}}, "1",
                            {oracle::thermal("T_cheap", "1", 120, 10, 20), oracle::thermal("T_mid", "2", 150, 30, 40),
                             oracle::thermal("T_peak", "1", 200, 80, 0), oracle::renewable("W", "2", 180),
                             oracle::renewable("S", "1", 60, GeneratorKind::kSolar)});
}

// Hand-rolled generator of (demand, wind factor, solar factor, cap).
struct Case {
  double demand, wind, solar, cap;
};
Case draw(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {u(rng) * 500.0, u(rng), u(rng) < 0.3 ? 0.0 : u(rng), 0.05 + 0.95 * u(rng)};
}

std::vector<double> factors(const NetworkModel& m, double wind, double solar) {
  std::vector<double> f(m.generator_count(), 0.0);
  f[*m.find_generator("W")] = wind;
  f[*m.find_generator("S")] = solar;
  return f;
}

}  // namespace

TEST_SUITE("dispatch") {

TEST_CASE("single unit serves demand") {
  const auto m = oracle::triangle();
  const auto h = merit_order_dispatch(m, 100.0, std::vector<double>{0.0}, 0.65);
  CHECK(h.feasible);
  CHECK(h.output_mw(0) == doctest::Approx(100.0));
  CHECK(h.snsp == 0.0);
}

TEST_CASE("SNSP cap curtails wind") {
  const auto m = oracle::make_model({"1", "2"}, {{"a", "1", "2"}}, "1",
                                    {oracle::thermal("T", "1", 200, 20), oracle::renewable("W", "2", 100)});
  const auto h = merit_order_dispatch(m, 100.0, std::vector<double>{0.0, 0.8}, 0.65);
  CHECK(h.output_mw(1) == doctest::Approx(65.0));
  CHECK(h.curtailed_mw == doctest::Approx(15.0));
  CHECK(h.output_mw(0) == doctest::Approx(35.0));
  CHECK(h.snsp == doctest::Approx(0.65));
}

TEST_CASE("capacity shortfall is flagged, not thrown") {
  const auto m = oracle::make_model({"1", "2"}, {{"a", "1", "2"}}, "1",
                                    {oracle::thermal("A", "1", 200, 20), oracle::thermal("B", "2", 200, 30)});
  const auto h = merit_order_dispatch(m, 500.0, std::vector<double>{0.0, 0.0}, 0.65);
  CHECK_FALSE(h.feasible);
  CHECK(h.shortfall_mw == doctest::Approx(100.0));
}

TEST_CASE("p_min of the marginal unit is met by backing off renewables") {
  const auto m = oracle::make_model({"1", "2"}, {{"a", "1", "2"}}, "1",
                                    {oracle::thermal("T", "1", 200, 20, 50), oracle::renewable("W", "2", 100)});
  const auto h = merit_order_dispatch(m, 100.0, std::vector<double>{0.0, 0.8}, 0.65);
  CHECK(h.output_mw(0) == doctest::Approx(50.0));
  CHECK(h.output_mw(1) == doctest::Approx(50.0));
  CHECK_FALSE(h.pmin_relaxed);

  const auto low = merit_order_dispatch(m, 20.0, std::vector<double>{0.0, 0.0}, 0.65);
  CHECK(low.output_mw(0) == doctest::Approx(20.0));
  CHECK(low.pmin_relaxed);
}

TEST_CASE("property: balance, no merit inversion, SNSP cap") {
  const auto m = mixed_model();
  std::mt19937_64 rng(2024);
  std::vector<GeneratorIndex> order;
  for (GeneratorIndex g = 0; g < m.generator_count(); ++g)
    if (!m.generators()[g].is_renewable()) order.push_back(g);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return m.generators()[a].srmc < m.generators()[b].srmc; });
  for (int i = 0; i < 2000; ++i) {
    const auto c = draw(rng);
    const auto h = merit_order_dispatch(m, c.demand, factors(m, c.wind, c.solar), c.cap);
    if (!h.feasible) continue;
    CHECK(std::abs(h.output_mw.sum() - c.demand) <= 1e-6);
    double nonsync = 0.0;
    for (GeneratorIndex g = 0; g < m.generator_count(); ++g)
      if (!m.generators()[g].synchronous) nonsync += h.output_mw(static_cast<Eigen::Index>(g));
    CHECK(nonsync <= c.cap * c.demand + 1e-9);
    CHECK(h.output_mw.minCoeff() >= -1e-12);
    // A dearer unit only runs above p_min when every cheaper one is full.
    for (std::size_t a = 0; a < order.size(); ++a)
      for (std::size_t b = a + 1; b < order.size(); ++b) {
        const auto& cheap = m.generators()[order[a]];
        const auto& dear = m.generators()[order[b]];
        if (h.output_mw(static_cast<Eigen::Index>(order[b])) > dear.p_min_mw + 1e-9)
          CHECK(h.output_mw(static_cast<Eigen::Index>(order[a])) == doctest::Approx(cheap.p_max_mw));
      }
  }
}

TEST_CASE("property: curtailment does not grow as the cap is raised") {
  const auto m = mixed_model();
  std::mt19937_64 rng(7);
  for (int i = 0; i < 300; ++i) {
    const auto c = draw(rng);
    double previous = std::numeric_limits<double>::infinity();
    for (int step = 1; step <= 10; ++step) {
      const auto h = merit_order_dispatch(m, c.demand, factors(m, c.wind, c.solar), step / 10.0);
      CHECK(h.curtailed_mw <= previous + 1e-9);
      previous = h.curtailed_mw;
    }
  }
}

TEST_CASE("year: time-invariant input, zero demand, one infeasible hour") {
  const auto m = oracle::triangle();
  DemandProfile p;
  p.hourly_mw.assign(kHoursPerYear, 90.0);
  p.bus_share = Eigen::Vector3d(0, 0, 1);
  const auto year = run_year(m, p, ResAvailability::none(m), 0.65, 3);
  REQUIRE(year.hours.size() == static_cast<std::size_t>(kHoursPerYear));
  for (const auto& h : year.hours) CHECK(h.output_mw(0) == 90.0);
  CHECK(year.infeasible_hours().empty());

  p.hourly_mw.assign(kHoursPerYear, 0.0);
  for (const auto& h : run_year(m, p, ResAvailability::none(m), 0.65).hours) CHECK(h.output_mw.isZero());

  p.hourly_mw.assign(kHoursPerYear, 90.0);
  p.hourly_mw[4321] = 250.0;  // above the single 200 MW unit
  const auto short_year = run_year(m, p, ResAvailability::none(m), 0.65, 2);
  CHECK(short_year.infeasible_hours() == std::vector<int>{4321});
}

TEST_CASE("bus injections") {
  const auto m = oracle::make_model({"1", "2"}, {{"a", "1", "2"}}, "1", {oracle::thermal("G", "1", 200, 1)});
  DemandProfile p;
  p.bus_share = Eigen::Vector2d(0, 1);
  auto h = merit_order_dispatch(m, 100.0, std::vector<double>{0.0}, 0.65);
  CHECK(bus_injections(m, h, p).isApprox(Eigen::Vector2d(100, -100)));
  p.bus_share = Eigen::Vector2d(0.5, 0.5);
  const auto inj = bus_injections(m, h, p);
  CHECK(inj.isApprox(Eigen::Vector2d(50, -50)));
  CHECK(std::abs(inj.sum()) < 1e-12);
}

TEST_CASE("dispatch files round trip") {
  const auto f = oracle::load_fixture("mesh6");
  const auto year = run_year(f.model, f.profile, f.availability, f.config.parameters.snsp_cap, 2);
  const auto dir = oracle::scratch_dir("dispatch_roundtrip");
  write_dispatch(year, f.model, dir, "key");
  const auto back = read_dispatch(dir, f.model, f.profile);
  REQUIRE(back.hours.size() == year.hours.size());
  for (std::size_t h = 0; h < year.hours.size(); h += 97)
    CHECK((back.hours[h].output_mw - year.hours[h].output_mw).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("demand profile validation") {
  const auto m = oracle::triangle();
  DemandProfile p;
  p.hourly_mw.assign(100, 1.0);
  p.bus_share = Eigen::Vector3d(0, 0, 1);
  CHECK_THROWS_AS(p.validate(m), ValidationError);
  p.hourly_mw.assign(kHoursPerYear, 1.0);
  p.bus_share = Eigen::Vector3d(0, 0.5, 0.4);
  CHECK_THROWS_AS(p.validate(m), ValidationError);
  p.bus_share = Eigen::Vector3d(0, 0.5, 0.5);
  CHECK_NOTHROW(p.validate(m));
}

}
