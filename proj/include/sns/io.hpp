#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sns/lightshift.hpp"
#include "sns/noise.hpp"
#include "sns/specfit.hpp"

namespace sns {

/// Bad command line or configuration; maps to exit status 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Ordered key -> value pairs from a config file or command line.
using KeyValues = std::map<std::string, std::string>;

/// Parses `key = value` lines. Blank lines, lines without '=' and keys
/// starting with "meta." are skipped; a leading '#' is stripped first, so
/// the header of any output CSV is itself a valid config.
KeyValues parse_key_values(const std::string& text);
KeyValues read_config_file(const std::filesystem::path& path);

struct SweepSpec {
  SweepVariable variable = SweepVariable::power;
  std::vector<double> grid;  // mW, degrees, or Hz for detuning
};

enum class RunMethod { resolvent, stochastic, eigen };

const char* to_string(RunMethod m);

/// Fully resolved run configuration. Keys carry their units:
///   rabi_mhz | power_mw, rabi_scale_mhz, detuning_ghz, theta_deg, larmor_mhz,
///   gamma_mhz, transit_khz, seed, time_step_ns, duration_ms, n_trajectories,
///   n_eff, substeps, freq_min_mhz, freq_max_mhz, freq_points,
///   power_grid_mw | theta_grid_deg | detuning_grid_ghz (list "a,b,c" or
///   range "start:stop:count"), method, channel, injection, model,
///   output_dir, emit_plots.
struct RunConfig {
  SimParams params;
  double rabi_scale_hz = kRabiHzAtOneMilliwatt;
  std::optional<SweepSpec> sweep;
  RunMethod method = RunMethod::resolvent;
  Channel channel = Channel::rotation;
  InjectionBasis injection = InjectionBasis::z_population;
  PeakModel model = PeakModel::two_lorentzians;
  std::size_t substeps = 8;
  std::filesystem::path output_dir = "sns_out";
  bool emit_plots = false;

  /// rabi_hz resolved from power_mw when set.
  SimParams resolved_params() const;
};

/// Defaults: 1 mW, detuning 1.5 GHz, theta 0, larmor 3.1 MHz, frequency grid
/// larmor +/- 2 MHz.
RunConfig default_config();

/// Applies key/values on top of `base`; unknown keys, malformed values and
/// more than one sweep grid raise UsageError.
RunConfig apply_key_values(RunConfig base, const KeyValues& kv);

/// Canonical key/value echo that re-creates the configuration.
KeyValues to_key_values(const RunConfig& cfg);

/// Parses "a,b,c" or "start:stop:count".
std::vector<double> parse_grid(const std::string& text);

/// Shortest round-trip decimal form.
std::string format_double(double v);

/// Writes via a temporary sibling and renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string header_block(const KeyValues& config, const KeyValues& meta);

/// CSV: header block, then "freq_hz,psd".
std::string spectrum_csv(const Spectrum& s, const KeyValues& config);
Spectrum read_spectrum_csv(const std::filesystem::path& path);

/// CSV: parameter,nu_plus_hz,nu_minus_hz,splitting_hz,ordering,
/// delta_minus1_hz,delta_0_hz,delta_plus1_hz
std::string sweep_csv(const SweepResult& sweep, const KeyValues& config);

std::string fit_csv_header();
std::string fit_csv_row(const std::string& source, const FitResult& r);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Minimal static SVG line chart.
std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<PlotSeries>& series);

}  // namespace sns
