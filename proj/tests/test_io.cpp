#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "sns/io.hpp"
#include "support.hpp"

using namespace sns;
namespace fs = std::filesystem;

TEST_CASE("key-value parsing") {
  const KeyValues kv = parse_key_values("# comment line\n  detuning_ghz = 2.5 \n# theta_deg = 30\n# meta.rbw_hz = 5\nnoise\n");
  CHECK(kv.size() == 2);
  CHECK(kv.at("detuning_ghz") == "2.5");
  CHECK(kv.at("theta_deg") == "30");
}

TEST_CASE("grids") {
  CHECK(parse_grid("1,2, 3") == std::vector<double>{1, 2, 3});
  CHECK(parse_grid("0:90:4") == std::vector<double>{0, 30, 60, 90});
  CHECK(parse_grid("").empty());
  CHECK_THROWS_AS(parse_grid("0:1"), UsageError);
  CHECK_THROWS_AS(parse_grid("a,b"), UsageError);
}

TEST_CASE("config application") {
  const RunConfig base = default_config();
  CHECK(base.resolved_params().rabi_hz == doctest::Approx(40e6));
  CHECK(base.params.freq_grid.min_hz == doctest::Approx(base.params.larmor_hz - 2e6));

  RunConfig c = apply_key_values(base, {{"detuning_ghz", "2"}, {"theta_deg", "45"}, {"power_grid_mw", "1:5:5"},
                                        {"method", "stochastic"}, {"channel", "ellipticity"}});
  CHECK(c.params.detuning_hz == 2e9);
  CHECK(c.params.theta_deg == 45.0);
  REQUIRE(c.sweep);
  CHECK(c.sweep->grid.size() == 5);
  CHECK(c.method == RunMethod::stochastic);
  CHECK(c.channel == Channel::ellipticity);

  c = apply_key_values(base, {{"rabi_mhz", "70"}});
  CHECK_FALSE(c.params.power_mw);
  CHECK(c.resolved_params().rabi_hz == doctest::Approx(70e6));

  CHECK_THROWS_AS(apply_key_values(base, {{"rabi_mhz", "70"}, {"power_mw", "3"}}), UsageError);
  CHECK_THROWS_AS(apply_key_values(base, {{"power_grid_mw", "1,2"}, {"theta_grid_deg", "0,10"}}), UsageError);
  CHECK_THROWS_AS(apply_key_values(base, {{"theta_grid_deg", ""}}), UsageError);
  CHECK_THROWS_AS(apply_key_values(base, {{"detuning", "2"}}), UsageError);
  CHECK_THROWS_AS(apply_key_values(base, {{"gamma_mhz", "-1"}}), UsageError);
  CHECK_THROWS_AS(apply_key_values(base, {{"theta_grid_deg", "0,400"}}), UsageError);
  CHECK_THROWS_AS(apply_key_values(base, {{"model", "voigt"}}), UsageError);
  CHECK_THROWS_AS(apply_key_values(base, {{"emit_plots", "maybe"}}), UsageError);
}

TEST_CASE("echoed configuration reproduces itself") {
  RunConfig c = apply_key_values(default_config(), {{"detuning_ghz", "1.7"}, {"time_step_ns", "62.5"},
                                                   {"transit_khz", "33.3"}, {"detuning_grid_ghz", "1,1.1,3"}});
  const KeyValues echo = to_key_values(c);
  const RunConfig again = apply_key_values(default_config(), echo);
  CHECK(to_key_values(again) == echo);
  CHECK(again.params.time_step_s == c.params.time_step_s);
  CHECK(again.params.detuning_hz == c.params.detuning_hz);
  CHECK(again.sweep->grid == c.sweep->grid);
  CHECK(echo.at("time_step_ns") == "62.5");
  CHECK(echo.count("output_dir") == 0);

  // a CSV header is itself a config
  Spectrum s = test::synthetic(PeakModel::single_lorentzian, {3.1e6, 80e3, 1.0, 0.0}, 2e6, 4e6, 11);
  const RunConfig from_header = apply_key_values(default_config(), parse_key_values(spectrum_csv(s, echo)));
  CHECK(to_key_values(from_header) == echo);
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-9, 0.0}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("spectrum CSV round trip") {
  const fs::path dir = fs::temp_directory_path() / "sns_io_test";
  fs::remove_all(dir);
  Spectrum s = test::synthetic(PeakModel::single_lorentzian, {3.1e6, 80e3, 1.0, 0.0}, 2e6, 4e6, 101);
  s.rbw_hz = 1234.5;
  write_file_atomic(dir / "s.csv", spectrum_csv(s, to_key_values(default_config())));
  CHECK_FALSE(fs::exists(dir / "s.csv.tmp"));
  const Spectrum back = read_spectrum_csv(dir / "s.csv");
  CHECK(back.freqs_hz == s.freqs_hz);
  CHECK(back.psd == s.psd);
  CHECK(back.rbw_hz == 1234.5);
  CHECK_THROWS_AS(read_spectrum_csv(dir / "missing.csv"), UsageError);
  fs::remove_all(dir);
}

TEST_CASE("sweep and fit CSV layout") {
  SimParams p;
  p.rabi_hz = 70e6;
  const SweepResult sw = splitting_vs(SweepVariable::theta, p, {40.0, 60.0});
  const std::string csv = sweep_csv(sw, {});
  CHECK(csv.find("parameter,nu_plus_hz,nu_minus_hz,splitting_hz,ordering,delta_minus1_hz,delta_0_hz,delta_plus1_hz\n") !=
        std::string::npos);
  CHECK(csv.find("# meta.splitting_zero = ") != std::string::npos);
  FitResult r;
  r.model = PeakModel::two_lorentzians;
  r.single_peak = true;
  const std::string row = fit_csv_row("x.csv", r);
  CHECK(row.rfind("x.csv,two_lorentzians,", 0) == 0);
  const std::string header = fit_csv_header();
  CHECK(std::count(row.begin(), row.end(), ',') == std::count(header.begin(), header.end(), ','));
}

TEST_CASE("svg chart") {
  const std::string svg = svg_line_chart("t", "x", "y", {{"a", {0, 1, 2}, {1, 3, 2}}});
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
}
