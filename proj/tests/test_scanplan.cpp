#include "qdm/error.hpp"
#include "qdm/scanplan.hpp"
#include "qdm/sensitivity.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

using namespace qdm;
using qdm::test::make_params;
using qdm::test::reference_params;
using qdm::test::rel_err;

namespace {

double event_sum(const ScanPlan& plan, const VoxelGrid& grid, const ProtocolParams& p, const PlanOptions& opt) {
  double total = 0;
  for (const auto& c : plan.cycles) {
    const auto slots = cycle_slots(c, grid, p, opt);
    switch (plan.protocol) {
      case Protocol::LCQDM: total += build_lcqdm_cycle(p, slots).span(); break;
      case Protocol::Leibold: total += build_leibold_cycle(p, slots).span(); break;
      default: total += build_conventional_cycle(p, slots.at(0)).span(); break;
    }
  }
  return total;
}

}  // namespace

TEST_CASE("voxel grid raster order") {
  const VoxelGrid g{4, 3, 2, 1};
  CHECK(g.size() == 24);
  CHECK(g.flatten({1, 0, 0}) == 1);
  CHECK(g.flatten({0, 1, 0}) == 4);
  CHECK(g.flatten({0, 0, 1}) == 12);
  for (std::size_t f = 0; f < g.size(); ++f) CHECK(g.flatten(g.unflatten(f)) == f);
  CHECK_THROWS_AS(g.flatten({4, 0, 0}), IndexError);
  CHECK_THROWS_AS(g.unflatten(24), IndexError);
  CHECK_THROWS_AS((VoxelGrid{0, 1, 1, 1}.validate()), DomainError);
}

TEST_CASE("LCQDM plan for the 100x100 grid") {
  const VoxelGrid g{100, 100, 1, 1};
  const auto p = reference_params();
  const auto plan = plan_acquisition(g, p, Protocol::LCQDM);
  CHECK(plan.cycles.size() == 11);
  CHECK(rel_err(plan.total_time, 52320.0) < 1e-12);
  CHECK(rel_err(event_sum(plan, g, p, {}), plan.total_time) < 1e-12);
  CHECK(plan.cycles.back().voxel_end == 10000);
}

TEST_CASE("conventional plan and speedup") {
  const VoxelGrid g{100, 100, 1, 1};
  const auto p = reference_params();
  const auto plan = plan_acquisition(g, p, Protocol::Conventional);
  CHECK(plan.cycles.size() == 10000);
  CHECK(rel_err(plan.total_time, 1251000.0) < 1e-12);
  const auto r = speedup_report(g, p);
  CHECK(std::abs(r.conventional_over_lcqdm - 23.910550458715596) < 1e-9);
  CHECK(r.leibold_over_lcqdm >= 1.0);
  CHECK(format_speedup_report(g, r).find("conventional_over_lcqdm = ") != std::string::npos);
}

TEST_CASE("single voxel plan equals the single cycle span") {
  const VoxelGrid g{1, 1, 1, 1};
  const auto p = reference_params();
  for (auto proto : {Protocol::LCQDM, Protocol::Leibold, Protocol::Conventional}) {
    const auto plan = plan_acquisition(g, p, proto);
    REQUIRE(plan.cycles.size() == 1);
    ReadoutSlot slot{0, p.t_d};
    const double span = proto == Protocol::LCQDM     ? build_lcqdm_cycle(p, std::span(&slot, 1)).span()
                        : proto == Protocol::Leibold ? build_leibold_cycle(p, std::span(&slot, 1)).span()
                                                     : build_conventional_cycle(p).span();
    CHECK(plan.total_time == doctest::Approx(span).epsilon(1e-15));
  }
}

TEST_CASE("z steps use their own dead time") {
  const VoxelGrid g{3, 3, 3, 1};
  const auto p = make_params(20, 20, 5, 100, 0.1, 5000);
  PlanOptions opt;
  opt.t_z_step = 50;
  const auto plan = plan_acquisition(g, p, Protocol::LCQDM, opt);
  REQUIRE(plan.cycles.size() == 1);
  CHECK(rel_err(plan.total_time, 120 + 27 * 5.1 + 2 * (50 - 0.1)) < 1e-12);
  CHECK(rel_err(event_sum(plan, g, p, opt), plan.total_time) < 1e-12);
}

TEST_CASE("RF map") {
  const VoxelGrid g{16, 16, 1, 1};
  AOMCalibration cal;
  const auto rf = rf_for_voxel({10, 0, 0}, g, cal);
  CHECK(rf.f_scan_x == doctest::Approx(81.0).epsilon(1e-15));
  const auto origin = rf_for_voxel({0, 0, 0}, g, cal);
  CHECK(origin.f_scan_x == cal.scan_x.f0);
  CHECK(origin.f_scan_y == cal.scan_y.f0);
  CHECK(origin.f_descan_x == cal.descan_x.f0);
  CHECK(origin.f_descan_y == cal.descan_y.f0);
  for (std::size_t y = 0; y < 16; ++y) {
    for (std::size_t x = 0; x < 16; ++x) {
      REQUIRE(voxel_for_rf(rf_for_voxel({x, y, 0}, g, cal), g, cal, 0) == VoxelIndex{x, y, 0});
    }
  }
  CHECK_THROWS_AS(rf_for_voxel({16, 0, 0}, g, cal), IndexError);
  auto skew = rf_for_voxel({3, 4, 0}, g, cal);
  skew.f_descan_x += 0.5;
  CHECK_THROWS_AS(voxel_for_rf(skew, g, cal, 0), DomainError);
  auto outside = rf_for_voxel({15, 4, 0}, g, cal);
  outside.f_scan_x += 0.1;
  outside.f_descan_x -= 0.1;
  CHECK_THROWS_AS(voxel_for_rf(outside, g, cal, 0), IndexError);

  AOMCalibration flat = cal;
  flat.scan_x.slope = 0;
  CHECK_THROWS_AS(flat.validate(g), DomainError);
}

TEST_CASE("RF schedule covers every voxel once") {
  const VoxelGrid g{7, 5, 3, 0.5};
  PlanOptions opt;
  opt.aom = AOMCalibration{};
  const auto plan = plan_acquisition(g, make_params(20, 20, 5, 100, 0.1, 60), Protocol::LCQDM, opt);
  std::set<std::size_t> seen;
  for (const auto& e : plan.rf_schedule) CHECK(seen.insert(g.flatten(e.voxel)).second);
  CHECK(seen.size() == g.size());
}

TEST_CASE("plan CSV formats") {
  const VoxelGrid g{4, 4, 1, 1};
  PlanOptions opt;
  opt.aom = AOMCalibration{};
  const auto plan = plan_acquisition(g, make_params(20, 20, 5, 100, 0.1, 30), Protocol::LCQDM, opt);
  std::ostringstream a, b;
  write_plan_csv(plan, a);
  write_rf_csv(plan, b);
  CHECK(a.str().rfind("cycle,voxel_start,voxel_end,start_us,duration_us\n0,0,4,0,", 0) == 0);
  CHECK(b.str().rfind("voxel_x,voxel_y,voxel_z,f_sx_mhz,f_sy_mhz,f_dx_mhz,f_dy_mhz\n0,0,0,80,80,80,80\n", 0) == 0);
}

TEST_CASE("property: plan totals equal event summation; order within a cycle is irrelevant") {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<std::size_t> dim(1, 12);
  for (int k = 0; k < 60; ++k) {
    const VoxelGrid g{dim(rng), dim(rng), dim(rng) % 3 + 1, 1};
    const auto p = make_params(qdm::test::log_uniform(rng, 1, 500), qdm::test::log_uniform(rng, 1, 500),
                               qdm::test::log_uniform(rng, 0.5, 50), qdm::test::log_uniform(rng, 1, 1000),
                               qdm::test::log_uniform(rng, 0.01, 1), qdm::test::log_uniform(rng, 50, 5000));
    for (auto proto : {Protocol::LCQDM, Protocol::Leibold, Protocol::Conventional}) {
      const auto plan = plan_acquisition(g, p, proto);
      REQUIRE(rel_err(event_sum(plan, g, p, {}), plan.total_time) < 1e-12);
      if (proto == Protocol::Conventional) continue;
      auto slots = cycle_slots(plan.cycles.front(), g, p);
      const double span = (proto == Protocol::LCQDM ? build_lcqdm_cycle(p, slots) : build_leibold_cycle(p, slots)).span();
      std::shuffle(slots.begin(), slots.end(), rng);
      const double shuffled =
          (proto == Protocol::LCQDM ? build_lcqdm_cycle(p, slots) : build_leibold_cycle(p, slots)).span();
      REQUIRE(rel_err(shuffled, span) < 1e-12);
    }
  }
}

TEST_CASE("property: total-time ordering under its exact condition") {
  // LCQDM <= Leibold exactly when C_L * t_init_ls <= (C_B - C_L) * t_mw + V * t_init_conf.
  std::mt19937_64 rng(29);
  const auto m = PhotophysicsModel::synthetic_default();
  std::uniform_int_distribution<std::size_t> dim(1, 60);
  int checked = 0;
  for (int k = 0; k < 400; ++k) {
    const VoxelGrid g{dim(rng), dim(rng), 1, 1};
    const double i_conf = qdm::test::log_uniform(rng, 0.00712, 7.12);
    const double i_ls = qdm::test::log_uniform(rng, 0.002, 2);
    const double t_mw = qdm::test::log_uniform(rng, 1, 1000);
    const auto p = params_at(m, Intensity(i_conf), Intensity(i_ls), t_mw, 0.1, 5000);
    const auto lc = plan_acquisition(g, p, Protocol::LCQDM);
    const auto lb = plan_acquisition(g, p, Protocol::Leibold);
    const auto cv = plan_acquisition(g, p, Protocol::Conventional);
    const auto cl = static_cast<double>(lc.cycles.size());
    const auto cb = static_cast<double>(lb.cycles.size());
    const bool condition = cl * p.t_init_ls <= (cb - cl) * p.t_mw + static_cast<double>(g.size()) * p.t_init_conf;
    REQUIRE(lb.total_time <= cv.total_time * (1 + 1e-12));
    if (condition) {
      REQUIRE(lc.total_time <= lb.total_time * (1 + 1e-12));
      ++checked;
    } else {
      REQUIRE(lc.total_time > lb.total_time * (1 - 1e-12));
    }
  }
  CHECK(checked > 100);
}
