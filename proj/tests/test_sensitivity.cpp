#include "qdm/error.hpp"
#include "qdm/sensitivity.hpp"
#include "support.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

using namespace qdm;
using qdm::test::make_params;
using qdm::test::rel_err;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

Big big_prefactor() { return Big(2) / (Big(1) + exp(Big(-1))); }

double oracle_lc(const ProtocolParams& p) {
  const Big num = (Big(p.t_init_ls) + p.t_mw + p.t1) * (Big(p.t_ro_conf) + p.t_d);
  return static_cast<double>(big_prefactor() * sqrt(num / Big(p.t1)));
}

double oracle_leibold(const ProtocolParams& p) {
  const Big num = (Big(p.t_mw) + p.t1) * (Big(p.t_ro_conf) + p.t_init_conf + p.t_d);
  return static_cast<double>(big_prefactor() * sqrt(num / Big(p.t1)));
}

double oracle_conv(const ProtocolParams& p) {
  return static_cast<double>(sqrt(Big(p.t_mw) + p.t_ro_conf + p.t_init_conf + p.t_d));
}

}  // namespace

TEST_CASE("endpoint prefactor") {
  CHECK(std::abs(endpoint_snr_prefactor() - 1.4621171572600098) < 1e-15);
  CHECK(std::abs(endpoint_snr_prefactor() - static_cast<double>(big_prefactor())) < 1e-15);
}

TEST_CASE("LCQDM sensitivity") {
  const auto p = make_params(20, 20, 5, 100, 0.1, 5000);
  CHECK(rel_err(eta_lcqdm(p), 3.341313610469405) < 1e-13);
  CHECK(rel_err(eta_lcqdm(p), oracle_lc(p)) < 1e-13);
  // Long-T1 asymptote.
  CHECK(rel_err(eta_lcqdm(make_params(0, 0, 5, 0, 0.1, 1e15)), 3.3019254331262343) < 1e-12);
  // Inner ratio collapses to (t_ro + t_d).
  CHECK(rel_err(eta_lcqdm(make_params(0, 0, 5, 0, 0.1, 5.1)), endpoint_snr_prefactor() * std::sqrt(5.1)) < 1e-14);
  CHECK_THROWS_AS(eta_lcqdm(make_params(20, 20, 5, 100, 0.1, 0)), DomainError);
}

TEST_CASE("Leibold sensitivity") {
  const auto p = make_params(20, 20, 5, 100, 0.1, 5000);
  CHECK(rel_err(eta_leibold(p), 7.398081647356149) < 1e-13);
  const auto low = make_params(1242, 1242, 22.1, 100, 0.1, 5000);
  CHECK(rel_err(eta_leibold(low), 52.50372931829411) < 1e-13);
  const auto no_init = make_params(0, 0, 5, 100, 0.1, 5000);
  CHECK(rel_err(eta_leibold(no_init), eta_lcqdm(no_init)) < 1e-15);
}

TEST_CASE("conventional sensitivity") {
  CHECK(rel_err(eta_conventional(make_params(20, 20, 5, 100, 0.1, 5000)), 11.184811129384349) < 1e-14);
  CHECK(eta_conventional(make_params(0, 0, 0, 1, 0, 5000)) == 1.0);
  CHECK(rel_err(eta_conventional(make_params(5, 5, 5, 1000, 0.1, 5000)), 31.78207041713928) < 1e-14);
}

TEST_CASE("time reduction factor squares the ratio") {
  CHECK(time_reduction_factor(5) == 25.0);
  CHECK(time_reduction_factor(1) == 1.0);
  CHECK(time_reduction_factor(2) == 4.0);
  CHECK_THROWS_AS(time_reduction_factor(-1), DomainError);
}

TEST_CASE("params at an operating point") {
  const auto m = PhotophysicsModel::synthetic_default();
  const auto p = params_at(m, Intensity(1), Intensity(0.2), 1000, 0.1, 5000);
  CHECK(rel_err(p.t_init_ls, 23.874204555145123) < 1e-13);
  CHECK(rel_err(p.t_init_conf, 5.011872336272723) < 1e-13);
  const auto r = evaluate_all(p);
  CHECK(rel_err(r.eta_lcqdm, 3.628483210061562) < 1e-12);
  CHECK(rel_err(r.eta_conventional, 31.782443969470715) < 1e-12);
  CHECK(rel_err(r.ratio_conv_over_lc, 8.75915420563059) < 1e-12);
}

TEST_CASE("log-spaced grid") {
  const auto g = log_spaced(1, 1000, 4);
  REQUIRE(g.size() == 4);
  CHECK(g.front() == 1.0);
  CHECK(g.back() == 1000.0);
  CHECK(g[1] == doctest::Approx(10).epsilon(1e-14));
  CHECK(log_spaced(3, 3, 1) == std::vector<double>{3});
}

TEST_CASE("1x1 sweep equals direct evaluation") {
  SweepSpec spec;
  spec.model = PhotophysicsModel::synthetic_default();
  spec.i_ls = Intensity(0.2);
  spec.i_conf_grid = {1.0};
  spec.t_mw_grid = {1000.0};
  const auto grid = sweep(spec);
  REQUIRE(grid.cells.size() == 1);
  const auto direct = evaluate_all(params_at(spec.model, Intensity(1), Intensity(0.2), 1000, 0.1, 5000));
  CHECK(grid.cells[0].valid);
  CHECK(grid.cells[0].result.eta_lcqdm == direct.eta_lcqdm);
  CHECK(grid.cells[0].result.ratio_conv_over_lc == direct.ratio_conv_over_lc);
  std::ostringstream csv;
  write_sweep_csv(grid, csv);
  const auto text = csv.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  CHECK(text.rfind("i_conf_mw_per_um2,t_mw_us,eta_lc,eta_leibold,eta_conv,ratio_leibold_lc,ratio_conv_lc,valid\n", 0) ==
        0);
}

TEST_CASE("out-of-window cells are recorded, not fatal") {
  SweepSpec spec;
  spec.model = PhotophysicsModel::synthetic_default();
  spec.i_ls = Intensity(0.2);
  spec.i_conf_grid = {1e-4, 1.0};
  spec.t_mw_grid = {100.0};
  const auto grid = sweep(spec);
  CHECK_FALSE(grid.at(0, 0).valid);
  CHECK_FALSE(grid.at(0, 0).error.empty());
  CHECK(grid.at(0, 1).valid);
  CHECK(grid.valid_count() == 1);
}

TEST_CASE("sweep result independent of worker count") {
  auto spec = default_sweep_spec(PhotophysicsModel::synthetic_default());
  spec.i_conf_grid = log_spaced(spec.i_conf_grid.front(), spec.i_conf_grid.back(), 17);
  spec.t_mw_grid = log_spaced(1, 1000, 13);
  std::ostringstream a, b;
  write_sweep_csv(sweep(spec, 1), a);
  write_sweep_csv(sweep(spec, 5), b);
  CHECK(a.str() == b.str());
  CHECK(ratio_heatmap_pgm(sweep(spec, 1), RatioMap::ConvOverLc) ==
        ratio_heatmap_pgm(sweep(spec, 3), RatioMap::ConvOverLc));
}

TEST_CASE("heatmap header") {
  auto spec = default_sweep_spec(PhotophysicsModel::synthetic_default());
  spec.i_conf_grid = log_spaced(spec.i_conf_grid.front(), spec.i_conf_grid.back(), 5);
  spec.t_mw_grid = log_spaced(1, 1000, 3);
  const auto pgm = ratio_heatmap_pgm(sweep(spec), RatioMap::LeiboldOverLc);
  CHECK(pgm.rfind("P2\n", 0) == 0);
  CHECK(pgm.find("5 3\n") != std::string::npos);
}

TEST_CASE("property: formulas match the arbitrary-precision oracle") {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 2000; ++k) {
    const auto p = make_params(qdm::test::log_uniform(rng, 0.1, 2000), qdm::test::log_uniform(rng, 0.1, 2000),
                               qdm::test::log_uniform(rng, 0.5, 100), qdm::test::log_uniform(rng, 1, 1000),
                               qdm::test::log_uniform(rng, 0.01, 1), qdm::test::log_uniform(rng, 10, 1e5));
    REQUIRE(rel_err(eta_lcqdm(p), oracle_lc(p)) < 1e-13);
    REQUIRE(rel_err(eta_leibold(p), oracle_leibold(p)) < 1e-13);
    REQUIRE(rel_err(eta_conventional(p), oracle_conv(p)) < 1e-13);
  }
}

TEST_CASE("property: scale covariance and monotonicity in t_mw") {
  std::mt19937_64 rng(19);
  for (int k = 0; k < 1000; ++k) {
    const auto p = make_params(qdm::test::log_uniform(rng, 0.1, 2000), qdm::test::log_uniform(rng, 0.1, 2000),
                               qdm::test::log_uniform(rng, 0.5, 100), qdm::test::log_uniform(rng, 1, 1000),
                               qdm::test::log_uniform(rng, 0.01, 1), qdm::test::log_uniform(rng, 10, 1e5));
    const double s = qdm::test::log_uniform(rng, 0.01, 100);
    const auto q = make_params(s * p.t_init_ls, s * p.t_init_conf, s * p.t_ro_conf, s * p.t_mw, s * p.t_d, s * p.t1);
    const auto a = evaluate_all(p);
    const auto b = evaluate_all(q);
    REQUIRE(rel_err(b.eta_lcqdm, std::sqrt(s) * a.eta_lcqdm) < 1e-12);
    REQUIRE(rel_err(b.eta_leibold, std::sqrt(s) * a.eta_leibold) < 1e-12);
    REQUIRE(rel_err(b.eta_conventional, std::sqrt(s) * a.eta_conventional) < 1e-12);

    auto longer = p;
    longer.t_mw *= 1.01;
    const auto c = evaluate_all(longer);
    REQUIRE(c.eta_lcqdm > a.eta_lcqdm);
    REQUIRE(c.eta_leibold > a.eta_leibold);
    REQUIRE(c.eta_conventional > a.eta_conventional);
  }
}
