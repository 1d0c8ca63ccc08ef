#include "sns/pipeline.hpp"

#include <cmath>
#include <sstream>

namespace sns {

namespace {

namespace fs = std::filesystem;

template <class F>
auto stage(const std::string& name, const std::string& where, F&& f) {
  try {
    return f();
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw Error("stage '" + name + "' failed (" + where + "): " + e.what());
  }
}

const char* sweep_unit(SweepVariable v) {
  switch (v) {
    case SweepVariable::power:
      return "mW";
    case SweepVariable::theta:
      return "deg";
    case SweepVariable::detuning:
      return "GHz";
  }
  return "";
}

double display_value(SweepVariable v, double value) { return v == SweepVariable::detuning ? value / 1e9 : value; }

std::string point_label(SweepVariable v, double value) {
  return std::string(to_string(v)) + "_" + format_double(display_value(v, value)) + sweep_unit(v);
}

std::string where_text(SweepVariable v, double value) {
  return std::string(to_string(v)) + " = " + format_double(display_value(v, value)) + " " + sweep_unit(v);
}

fs::path write(const fs::path& path, const std::string& content, std::vector<fs::path>& files) {
  write_file_atomic(path, content);
  files.push_back(path);
  return path;
}

PlotSeries spectrum_series(const Spectrum& s, const std::string& label) {
  PlotSeries ps{label, {}, s.psd};
  for (double f : s.freqs_hz) ps.x.push_back(f / 1e6);
  return ps;
}

std::string summary_csv(const KeyValues& values) {
  std::string out = "key,value\n";
  for (const auto& [k, v] : values) out += k + "," + v + "\n";
  return out;
}

struct SpectraRun {
  std::vector<double> parameters;
  std::vector<Spectrum> spectra;
  std::vector<FitResult> fits;
};

// sweep -> spectra -> fits, writing spectra and fits.csv into dir
SpectraRun spectra_and_fits(const RunConfig& cfg, const SweepSpec& sweep, const fs::path& dir,
                            const std::string& fits_name, std::vector<fs::path>& files) {
  SpectraRun run;
  std::string fits = fit_csv_header();
  std::vector<PlotSeries> plot;
  for (double v : sweep.grid) {
    const std::string where = where_text(sweep.variable, v);
    const SimParams p = apply_sweep_value(cfg.resolved_params(), sweep.variable, v);
    Spectrum s = stage("spectrum", where, [&] { return compute_spectrum(cfg, p); });
    const std::string name = "spectrum_" + point_label(sweep.variable, v) + ".csv";
    RunConfig single = cfg;
    single.sweep.reset();
    single.params = apply_sweep_value(cfg.params, sweep.variable, v);
    write(dir / name, spectrum_csv(s, to_key_values(single)), files);
    FitResult r = stage("fit", where, [&] { return fit_dual_peak(s, cfg.model); });
    fits += fit_csv_row(name, r);
    plot.push_back(spectrum_series(s, where));
    run.parameters.push_back(v);
    run.spectra.push_back(std::move(s));
    run.fits.push_back(r);
  }
  write(dir / fits_name, fits, files);
  if (cfg.emit_plots) {
    fs::path svg = dir / fits_name;
    svg.replace_extension(".spectra.svg");
    write(svg, svg_line_chart("Spin noise spectra", "frequency (MHz)", "PSD (arb. units)", plot), files);
  }
  return run;
}

SweepResult eigen_sweep(const RunConfig& cfg, const SweepSpec& sweep) {
  return stage("eigen", std::string(to_string(sweep.variable)) + " sweep",
               [&] { return splitting_vs(sweep.variable, cfg.resolved_params(), sweep.grid); });
}

void plot_sweep(const SweepResult& sw, const fs::path& path, std::vector<fs::path>& files) {
  PlotSeries nu_p{"nu+", {}, {}}, nu_m{"nu-", {}, {}}, split{"splitting", {}, {}};
  PlotSeries d_m{"delta_-1", {}, {}}, d_0{"delta_0", {}, {}}, d_p{"delta_+1", {}, {}};
  for (const auto& pt : sw.points) {
    const double x = display_value(sw.variable, pt.parameter);
    split.x.push_back(x);
    split.y.push_back(pt.freqs.splitting_hz / 1e3);
    d_m.x.push_back(x);
    d_m.y.push_back(pt.freqs.shifts.delta_minus1_hz / 1e3);
    d_0.x.push_back(x);
    d_0.y.push_back(pt.freqs.shifts.delta_0_hz / 1e3);
    d_p.x.push_back(x);
    d_p.y.push_back(pt.freqs.shifts.delta_plus1_hz / 1e3);
  }
  const std::string xl = std::string(to_string(sw.variable)) + " (" + sweep_unit(sw.variable) + ")";
  write(path, svg_line_chart("Light shifts and splitting", xl, "kHz", {d_m, d_0, d_p, split}), files);
}

std::vector<double> fitted_splittings(const SpectraRun& run) {
  std::vector<double> out;
  for (const auto& f : run.fits) out.push_back(f.splitting_hz);
  return out;
}

}  // namespace

Spectrum compute_spectrum(const RunConfig& cfg, const SimParams& p) {
  const OperatorSet ops = make_operator_set();
  const Observable a = make_observable(cfg.channel, p.theta_deg, ops);
  switch (cfg.method) {
    case RunMethod::resolvent: {
      const std::vector<double> grid = p.freq_grid.values();
      ResolventOptions opt;
      opt.injection = cfg.injection;
      opt.n_eff = p.n_eff;
      return resolvent_spectrum(p, a, grid, opt);
    }
    case RunMethod::stochastic: {
      StochasticOptions opt;
      opt.injection = cfg.injection;
      opt.substeps = cfg.substeps;
      return crop(stochastic_spectrum(p, a, opt), p.freq_grid.min_hz, p.freq_grid.max_hz);
    }
    case RunMethod::eigen:
      break;
  }
  throw UsageError("spectrum needs method resolvent or stochastic");
}

std::vector<fs::path> cmd_eigen(const RunConfig& cfg) {
  if (!cfg.sweep || cfg.sweep->grid.empty()) {
    throw UsageError("eigen needs a non-empty sweep grid (power_grid_mw, theta_grid_deg or detuning_grid_ghz)");
  }
  std::vector<fs::path> files;
  const SweepResult sw = eigen_sweep(cfg, *cfg.sweep);
  write(cfg.output_dir / "eigen.csv", sweep_csv(sw, to_key_values(cfg)), files);
  if (cfg.emit_plots) plot_sweep(sw, cfg.output_dir / "eigen.svg", files);
  return files;
}

std::vector<fs::path> cmd_spectrum(const RunConfig& cfg) {
  if (cfg.method == RunMethod::eigen) throw UsageError("spectrum needs method resolvent or stochastic");
  std::vector<fs::path> files;
  if (cfg.sweep) {
    std::vector<PlotSeries> plot;
    for (double v : cfg.sweep->grid) {
      const std::string where = where_text(cfg.sweep->variable, v);
      const SimParams p = apply_sweep_value(cfg.resolved_params(), cfg.sweep->variable, v);
      const Spectrum s = stage("spectrum", where, [&] { return compute_spectrum(cfg, p); });
      RunConfig single = cfg;
      single.sweep.reset();
      single.params = apply_sweep_value(cfg.params, cfg.sweep->variable, v);
      const std::string stem = "spectrum_" + point_label(cfg.sweep->variable, v);
      write(cfg.output_dir / (stem + ".csv"), spectrum_csv(s, to_key_values(single)), files);
      plot.push_back(spectrum_series(s, where));
    }
    if (cfg.emit_plots) {
      write(cfg.output_dir / "spectra.svg",
            svg_line_chart("Spin noise spectra", "frequency (MHz)", "PSD (arb. units)", plot), files);
    }
    return files;
  }
  const SimParams p = cfg.resolved_params();
  const Spectrum s = stage("spectrum", "single point", [&] { return compute_spectrum(cfg, p); });
  write(cfg.output_dir / "spectrum.csv", spectrum_csv(s, to_key_values(cfg)), files);
  if (cfg.emit_plots) {
    write(cfg.output_dir / "spectrum.svg",
          svg_line_chart("Spin noise spectrum", "frequency (MHz)", "PSD (arb. units)", {spectrum_series(s, "psd")}),
          files);
  }
  return files;
}

fs::path cmd_fit(const std::vector<fs::path>& inputs, PeakModel model, const fs::path& output) {
  if (inputs.empty()) throw UsageError("fit needs at least one input spectrum");
  std::string out = fit_csv_header();
  for (const auto& in : inputs) {
    const Spectrum s = read_spectrum_csv(in);
    const FitResult r = stage("fit", in.string(), [&] { return fit_dual_peak(s, model); });
    out += fit_csv_row(in.filename().string(), r);
  }
  write_file_atomic(output, out);
  return output;
}

const char* to_string(Figure f) {
  switch (f) {
    case Figure::fig2:
      return "fig2";
    case Figure::fig3:
      return "fig3";
    case Figure::fig4:
      return "fig4";
    case Figure::fig5:
      return "fig5";
  }
  return "?";
}

Figure figure_from_string(const std::string& s) {
  if (s == "fig2") return Figure::fig2;
  if (s == "fig3") return Figure::fig3;
  if (s == "fig4") return Figure::fig4;
  if (s == "fig5") return Figure::fig5;
  throw UsageError("unknown figure '" + s + "' (expected fig2, fig3, fig4 or fig5)");
}

RunConfig figure_defaults(Figure f) {
  RunConfig c = default_config();
  c.params.detuning_hz = 1.5e9;
  c.params.theta_deg = 0.0;
  c.model = PeakModel::two_lorentzians;
  switch (f) {
    case Figure::fig2:
      c.params.larmor_hz = 3.0e6;
      c.params.freq_grid = {1.0e6, 5.0e6, 2001};
      c.sweep = SweepSpec{SweepVariable::power, {1.0, 2.0, 3.0, 4.0, 5.0}};
      break;
    case Figure::fig3:
      c.params.power_mw.reset();
      c.params.rabi_hz = 70.0e6;
      c.sweep = SweepSpec{SweepVariable::theta, parse_grid("0:90:19")};
      break;
    case Figure::fig4:
      c.sweep = SweepSpec{SweepVariable::power, {1.0, 2.0, 3.0, 4.0, 5.0}};
      break;
    case Figure::fig5:
      c.params.power_mw.reset();
      c.params.rabi_hz = 70.0e6;
      c.method = RunMethod::eigen;
      c.sweep = SweepSpec{SweepVariable::theta, parse_grid("0:90:91")};
      break;
  }
  return c;
}

ReproduceSummary cmd_reproduce(Figure f, const KeyValues& overrides, const fs::path& output_dir) {
  RunConfig cfg = apply_key_values(figure_defaults(f), overrides);
  ReproduceSummary out;
  out.directory = output_dir / to_string(f);
  auto& files = out.files;
  auto& values = out.values;
  const fs::path& dir = out.directory;

  switch (f) {
    case Figure::fig2: {
      const SpectraRun run = spectra_and_fits(cfg, *cfg.sweep, dir, "fits.csv", files);
      const TrendFit t = stage("trend", "fitted splitting vs power",
                               [&] { return fit_trend(run.parameters, fitted_splittings(run), TrendLaw::linear); });
      values["fitted_slope_hz_per_mw"] = format_double(t.coefficient);
      values["fitted_r_squared"] = format_double(t.r_squared);
      const SweepResult sw = eigen_sweep(cfg, *cfg.sweep);
      write(dir / "eigen.csv", sweep_csv(sw, to_key_values(cfg)), files);
      values["eigen_slope_hz_per_mw"] = format_double(sw.trend->coefficient);
      values["eigen_r_squared"] = format_double(sw.trend->r_squared);
      break;
    }
    case Figure::fig3: {
      const SpectraRun run = spectra_and_fits(cfg, *cfg.sweep, dir, "fits.csv", files);
      const SweepResult sw = eigen_sweep(cfg, *cfg.sweep);
      write(dir / "eigen.csv", sweep_csv(sw, to_key_values(cfg)), files);
      std::size_t arg = 0;
      for (std::size_t k = 1; k < sw.points.size(); ++k)
        if (sw.points[k].freqs.splitting_hz < sw.points[arg].freqs.splitting_hz) arg = k;
      values["eigen_min_splitting_theta_deg"] = format_double(sw.points[arg].parameter);
      if (auto z = signed_splitting_zero(sw)) values["eigen_zero_crossing_deg"] = format_double(*z);
      std::size_t fit_arg = 0;
      for (std::size_t k = 1; k < run.fits.size(); ++k)
        if (run.fits[k].splitting_hz < run.fits[fit_arg].splitting_hz) fit_arg = k;
      values["fitted_min_splitting_theta_deg"] = format_double(run.parameters[fit_arg]);
      if (cfg.emit_plots) plot_sweep(sw, dir / "eigen.svg", files);
      break;
    }
    case Figure::fig4: {
      RunConfig eig = cfg;
      const SweepSpec power_b{SweepVariable::power, parse_grid("0:5:11")};
      const SweepResult sw_b = eigen_sweep(eig, power_b);
      write(dir / "eigen_power.csv", sweep_csv(sw_b, to_key_values(cfg)), files);

      const SweepSpec det{SweepVariable::detuning, parse_grid("1e9:3e9:9")};
      RunConfig at3 = cfg;
      at3.params.power_mw = 3.0;
      const SweepResult sw_d = eigen_sweep(at3, det);
      write(dir / "eigen_detuning.csv", sweep_csv(sw_d, to_key_values(at3)), files);

      const SpectraRun run = spectra_and_fits(cfg, *cfg.sweep, dir, "fits_power.csv", files);
      const TrendFit tc = stage("trend", "fitted splitting vs power",
                                [&] { return fit_trend(run.parameters, fitted_splittings(run), TrendLaw::linear); });
      const SpectraRun run_d = spectra_and_fits(at3, det, dir, "fits_detuning.csv", files);
      const TrendFit td = stage("trend", "fitted splitting vs detuning", [&] {
        return fit_trend(run_d.parameters, fitted_splittings(run_d), TrendLaw::hyperbolic);
      });

      double lo = INFINITY, hi = -INFINITY;
      for (const auto& pt : sw_d.points) {
        const double prod = pt.freqs.splitting_hz * pt.parameter;
        lo = std::min(lo, prod);
        hi = std::max(hi, prod);
      }
      values["eigen_slope_hz_per_mw"] = format_double(sw_b.trend->coefficient);
      values["eigen_linear_r_squared"] = format_double(sw_b.trend->r_squared);
      values["eigen_hyperbolic_coefficient_hz2"] = format_double(sw_d.trend->coefficient);
      values["eigen_hyperbolic_r_squared"] = format_double(sw_d.trend->r_squared);
      values["eigen_splitting_times_detuning_spread"] = format_double((hi - lo) / (0.5 * (hi + lo)));
      values["fitted_slope_hz_per_mw"] = format_double(tc.coefficient);
      values["fitted_linear_r_squared"] = format_double(tc.r_squared);
      values["fitted_hyperbolic_coefficient_hz2"] = format_double(td.coefficient);
      values["fitted_hyperbolic_r_squared"] = format_double(td.r_squared);
      if (cfg.emit_plots) {
        plot_sweep(sw_b, dir / "eigen_power.svg", files);
        plot_sweep(sw_d, dir / "eigen_detuning.svg", files);
      }
      break;
    }
    case Figure::fig5: {
      const SweepResult sw = eigen_sweep(cfg, *cfg.sweep);
      write(dir / "eigen_theta.csv", sweep_csv(sw, to_key_values(cfg)), files);
      if (auto z = signed_splitting_zero(sw)) values["eigen_zero_crossing_deg"] = format_double(*z);
      bool reversed = false;
      for (std::size_t k = 1; k < sw.points.size(); ++k)
        reversed |= sw.points[k].freqs.ordering * sw.points[0].freqs.ordering < 0;
      values["ordering_reverses"] = reversed ? "1" : "0";
      if (cfg.emit_plots) plot_sweep(sw, dir / "eigen_theta.svg", files);
      break;
    }
  }
  write(dir / "summary.csv", summary_csv(values), files);
  return out;
}

}  // namespace sns
