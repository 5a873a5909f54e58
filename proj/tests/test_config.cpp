#include "qdm/config.hpp"
#include "qdm/error.hpp"
#include "qdm/text.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <string>

using namespace qdm;
using qdm::test::with_line;

namespace {

std::string base_text() { return text::read_file(QDM_TEST_CONFIG); }

std::size_t error_line(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  FAIL("expected a config error");
  return 0;
}

std::size_t line_of(const std::string& text, const std::string& key) {
  const auto pos = text.find("\n" + key + " =");
  return static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(pos) + 1, '\n')) + 1;
}

}  // namespace

TEST_CASE("default config file") {
  const auto c = load_config(QDM_TEST_CONFIG);
  CHECK(c.t_d == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(c.t1 == 5000.0);
  CHECK(c.p_ls == 200.0);
  CHECK(c.light_sheet_intensity().value() == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(c.confocal_readout_intensity().value() == doctest::Approx(7.11997152011392).epsilon(1e-14));
  CHECK(c.p_conf_min == doctest::Approx(0.002).epsilon(1e-15));
  CHECK(c.model() == PhotophysicsModel::synthetic_default());
  CHECK(c.grid().size() == 10000);
}

TEST_CASE("unit conversion to canonical units") {
  const auto t = base_text();
  CHECK(parse_config(with_line(t, "p_ls", "p_ls = 2 W")).p_ls == 2000.0);
  CHECK(parse_config(with_line(t, "t_d", "t_d = 0.1 us")).t_d == 0.1);
  CHECK(parse_config(with_line(t, "t_d", "t_d = 100 \xce\xbcs")).t_d == 100.0);
  CHECK(parse_config(with_line(t, "t_d", "t_d = 100 \xc2\xb5s")).t_d == 100.0);
  CHECK(parse_config(with_line(t, "t1", "t1 = 5000000 ns")).t1 == 5000.0);
  CHECK(parse_config(with_line(t, "t1", "t1 = 0.005 s")).t1 == 5000.0);
  CHECK(parse_config(with_line(t, "l_y", "l_y = 0.1 mm")).l_y == 100.0);
  CHECK(parse_config(with_line(t, "delta_conf", "delta_conf = 530 nm")).delta_conf == 0.53);
  CHECK(parse_config(with_line(t, "p_conf", "p_conf = 20 uW")).p_conf == 0.02);
  CHECK(parse_config(with_line(t, "i_sat", "i_sat = 1 mW/um^2")).i_sat == 1.0);
  CHECK(parse_config(with_line(t, "i_sat", "i_sat = 1000 uW/um2")).i_sat == 1.0);
  CHECK(parse_config(with_line(t, "i_sat", "i_sat = 100000 W/cm2")).i_sat == 1.0);
  CHECK(parse_config(with_line(t, "r_max", "r_max = 30000000 counts/s")).r_max == 30.0);
  CHECK(parse_config(with_line(t, "aom_sx_f0", "aom_sx_f0 = 0.08 GHz")).aom.scan_x.f0 == 80.0);
  CHECK(parse_config(with_line(t, "aom_sx_slope", "aom_sx_slope = 100 MHz/mm")).aom.scan_x.slope == 0.1);
}

TEST_CASE("overrides") {
  auto t = base_text() + "i_ls = 0.5 mW/um2\ni_conf = 1 mW/um2\nt_init_ls = 20 us\n";
  const auto c = parse_config(t);
  CHECK(c.light_sheet_intensity().value() == 0.5);
  CHECK(c.confocal_readout_intensity().value() == 1.0);
  CHECK(c.params().t_init_ls == 20.0);
}

TEST_CASE("errors name the line") {
  const auto t = base_text();
  CHECK(error_line(with_line(t, "t_d", "t_d = -1 us")) == line_of(t, "t_d"));
  CHECK(error_line(with_line(t, "t_d", "t_d = 1")) == line_of(t, "t_d"));
  CHECK(error_line(with_line(t, "t_d", "t_d = 1 mW")) == line_of(t, "t_d"));
  CHECK(error_line(with_line(t, "t_d", "t_d = abc us")) == line_of(t, "t_d"));
  CHECK(error_line(with_line(t, "c0", "c0 = 0.03 us")) == line_of(t, "c0"));
  CHECK(error_line(with_line(t, "t_d", "t_dead = 1 us")) == line_of(t, "t_d"));
  CHECK(error_line(with_line(t, "t_d", "t_d 1 us")) == line_of(t, "t_d"));
  CHECK(error_line(with_line(t, "grid_nx", "grid_nx = 0")) == line_of(t, "grid_nx"));
  CHECK(error_line(with_line(t, "grid_nx", "grid_nx = 2.5")) == line_of(t, "grid_nx"));
  CHECK(error_line(t + "t_d = 1 us\n") > line_of(t, "t_d"));
  CHECK(error_line(with_line(t, "c0", "c0 = 1.5")) == line_of(t, "c0"));
  CHECK(error_line(with_line(t, "aom_dx_slope", "aom_dx_slope = -1 MHz/um")) == line_of(t, "aom_sx_f0"));
}

TEST_CASE("missing required key") {
  const auto t = with_line(base_text(), "t1", "# t1 removed");
  CHECK_THROWS_WITH_AS(parse_config(t), "missing required key 't1'", ConfigError);
}

TEST_CASE("serialization round-trips") {
  auto c = load_config(QDM_TEST_CONFIG);
  CHECK(parse_config(serialize_config(c)) == c);
  c = parse_config(base_text() + "i_conf = 0.123456789 mW/um2\nt_ro_conf = 3.3 us\nt_z_step = 12 us\n");
  c.seed = 0xfedcba9876543210ULL;
  c.output_dir = "some/dir";
  const auto back = parse_config(serialize_config(c));
  CHECK(back == c);
  CHECK(serialize_config(back) == serialize_config(c));
}
