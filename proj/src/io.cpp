#include "sns/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace sns {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw UsageError("config key '" + key + "': '" + text + "' is not a number");
  }
  return v;
}

std::size_t parse_count(const std::string& key, const std::string& text) {
  const double v = parse_number(key, text);
  if (v < 0.0 || v != std::floor(v)) throw UsageError("config key '" + key + "' must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw UsageError("config key '" + key + "' must be true or false");
}

template <class F>
auto as_usage(F&& f) {
  try {
    return f();
  } catch (const UsageError&) {
    throw;
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

}  // namespace

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (!t.empty() && t.front() == '#') t = trim(t.substr(1));
    const auto eq = t.find('=');
    if (t.empty() || eq == std::string::npos) continue;
    const std::string key = trim(t.substr(0, eq));
    if (key.empty() || key.rfind("meta.", 0) == 0) continue;
    kv[key] = trim(t.substr(eq + 1));
  }
  return kv;
}

KeyValues read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str());
}

const char* to_string(RunMethod m) {
  switch (m) {
    case RunMethod::resolvent:
      return "resolvent";
    case RunMethod::stochastic:
      return "stochastic";
    case RunMethod::eigen:
      return "eigen";
  }
  return "?";
}

SimParams RunConfig::resolved_params() const { return resolve_power(params, rabi_scale_hz); }

RunConfig default_config() {
  RunConfig c;
  c.params.power_mw = 1.0;
  c.params.freq_grid = {c.params.larmor_hz - 2.0e6, c.params.larmor_hz + 2.0e6, 2001};
  return c;
}

std::vector<double> parse_grid(const std::string& text) {
  const std::string t = trim(text);
  std::vector<double> out;
  if (t.empty()) return out;
  if (t.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::istringstream in(t);
    std::string part;
    while (std::getline(in, part, ':')) parts.push_back(part);
    if (parts.size() != 3) throw UsageError("grid range must be start:stop:count, got '" + text + "'");
    const double a = parse_number("grid", parts[0]);
    const double b = parse_number("grid", parts[1]);
    const std::size_t n = parse_count("grid", parts[2]);
    for (std::size_t k = 0; k < n; ++k) {
      out.push_back(n == 1 ? a : a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1));
    }
    return out;
  }
  std::istringstream in(t);
  std::string part;
  while (std::getline(in, part, ',')) {
    if (!trim(part).empty()) out.push_back(parse_number("grid", part));
  }
  return out;
}

RunConfig apply_key_values(RunConfig c, const KeyValues& kv) {
  SimParams& p = c.params;
  if (kv.count("rabi_mhz") && kv.count("power_mw")) {
    throw UsageError("give either rabi_mhz or power_mw, not both");
  }
  auto set_sweep = [&](SweepVariable v, std::vector<double> grid) {
    if (c.sweep && c.sweep->variable != v) {
      throw UsageError("exactly one sweep grid may be given (power_grid_mw, theta_grid_deg or detuning_grid_ghz)");
    }
    if (grid.empty()) throw UsageError(std::string("sweep grid for ") + to_string(v) + " is empty");
    c.sweep = SweepSpec{v, std::move(grid)};
  };

  for (const auto& [key, value] : kv) {
    if (key == "rabi_mhz") {
      p.rabi_hz = parse_number(key, value) * 1e6;
      p.power_mw.reset();
    } else if (key == "power_mw") {
      p.power_mw = parse_number(key, value);
    } else if (key == "rabi_scale_mhz") {
      c.rabi_scale_hz = parse_number(key, value) * 1e6;
    } else if (key == "detuning_ghz") {
      p.detuning_hz = parse_number(key, value) * 1e9;
    } else if (key == "theta_deg") {
      p.theta_deg = parse_number(key, value);
    } else if (key == "larmor_mhz") {
      p.larmor_hz = parse_number(key, value) * 1e6;
    } else if (key == "gamma_mhz") {
      p.gamma_hz = parse_number(key, value) * 1e6;
    } else if (key == "transit_khz") {
      p.transit_hz = parse_number(key, value) * 1e3;
    } else if (key == "seed") {
      p.rng_seed = static_cast<std::uint64_t>(parse_count(key, value));
    } else if (key == "time_step_ns") {
      p.time_step_s = parse_number(key, value) / 1e9;
    } else if (key == "duration_ms") {
      p.duration_s = parse_number(key, value) / 1e3;
    } else if (key == "n_trajectories") {
      p.n_trajectories = parse_count(key, value);
    } else if (key == "n_eff") {
      p.n_eff = parse_number(key, value);
    } else if (key == "substeps") {
      c.substeps = parse_count(key, value);
    } else if (key == "freq_min_mhz") {
      p.freq_grid.min_hz = parse_number(key, value) * 1e6;
    } else if (key == "freq_max_mhz") {
      p.freq_grid.max_hz = parse_number(key, value) * 1e6;
    } else if (key == "freq_points") {
      p.freq_grid.points = parse_count(key, value);
    } else if (key == "power_grid_mw") {
      set_sweep(SweepVariable::power, parse_grid(value));
    } else if (key == "theta_grid_deg") {
      set_sweep(SweepVariable::theta, parse_grid(value));
    } else if (key == "detuning_grid_ghz") {
      auto g = parse_grid(value);
      for (double& v : g) v *= 1e9;
      set_sweep(SweepVariable::detuning, std::move(g));
    } else if (key == "method") {
      const std::string v = trim(value);
      if (v == "resolvent") c.method = RunMethod::resolvent;
      else if (v == "stochastic") c.method = RunMethod::stochastic;
      else if (v == "eigen") c.method = RunMethod::eigen;
      else throw UsageError("method must be resolvent, stochastic or eigen");
    } else if (key == "channel") {
      c.channel = as_usage([&] { return channel_from_string(trim(value)); });
    } else if (key == "injection") {
      c.injection = as_usage([&] { return injection_basis_from_string(trim(value)); });
    } else if (key == "model") {
      c.model = as_usage([&] { return peak_model_from_string(trim(value)); });
    } else if (key == "output_dir") {
      c.output_dir = trim(value);
    } else if (key == "emit_plots") {
      c.emit_plots = parse_bool(key, value);
    } else {
      throw UsageError("unknown config key '" + key + "'");
    }
  }
  as_usage([&] {
    c.resolved_params().validate();
    return 0;
  });
  if (c.sweep) {
    for (double v : c.sweep->grid) {
      const bool bad = (c.sweep->variable == SweepVariable::power && v < 0.0) ||
                       (c.sweep->variable == SweepVariable::theta && (v < 0.0 || v > 360.0)) ||
                       (c.sweep->variable == SweepVariable::detuning && v == 0.0);
      if (bad) throw UsageError("sweep value " + format_double(v) + " is outside the valid range");
    }
  }
  return c;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

// Shortest decimal text t whose parsed SI value equals v exactly, so echoed
// configs reproduce the original run. Sub-unit scales parse by division.
std::string format_scaled(double v, double unit) {
  const auto to_si = [unit](double x) { return unit >= 1.0 ? x * unit : x / std::round(1.0 / unit); };
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    const auto res = std::to_chars(buf, buf + sizeof(buf), v / unit, std::chars_format::general, prec);
    const std::string t(buf, res.ptr);
    if (to_si(std::stod(t)) == v) return t;
  }
  return format_double(v / unit);
}

std::string grid_text(const std::vector<double>& g, double unit) {
  std::string out;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (k) out += ",";
    out += format_scaled(g[k], unit);
  }
  return out;
}

}  // namespace

KeyValues to_key_values(const RunConfig& c) {
  const SimParams& p = c.params;
  KeyValues kv;
  if (p.power_mw) kv["power_mw"] = format_double(*p.power_mw);
  else kv["rabi_mhz"] = format_scaled(p.rabi_hz, 1e6);
  kv["rabi_scale_mhz"] = format_scaled(c.rabi_scale_hz, 1e6);
  kv["detuning_ghz"] = format_scaled(p.detuning_hz, 1e9);
  kv["theta_deg"] = format_double(p.theta_deg);
  kv["larmor_mhz"] = format_scaled(p.larmor_hz, 1e6);
  kv["gamma_mhz"] = format_scaled(p.gamma_hz, 1e6);
  kv["transit_khz"] = format_scaled(p.transit_hz, 1e3);
  kv["seed"] = std::to_string(p.rng_seed);
  kv["time_step_ns"] = format_scaled(p.time_step_s, 1e-9);
  kv["duration_ms"] = format_scaled(p.duration_s, 1e-3);
  kv["n_trajectories"] = std::to_string(p.n_trajectories);
  kv["n_eff"] = format_double(p.n_eff);
  kv["substeps"] = std::to_string(c.substeps);
  kv["freq_min_mhz"] = format_scaled(p.freq_grid.min_hz, 1e6);
  kv["freq_max_mhz"] = format_scaled(p.freq_grid.max_hz, 1e6);
  kv["freq_points"] = std::to_string(p.freq_grid.points);
  if (c.sweep) {
    switch (c.sweep->variable) {
      case SweepVariable::power:
        kv["power_grid_mw"] = grid_text(c.sweep->grid, 1.0);
        break;
      case SweepVariable::theta:
        kv["theta_grid_deg"] = grid_text(c.sweep->grid, 1.0);
        break;
      case SweepVariable::detuning:
        kv["detuning_grid_ghz"] = grid_text(c.sweep->grid, 1e9);
        break;
    }
  }
  kv["method"] = to_string(c.method);
  kv["channel"] = to_string(c.channel);
  kv["injection"] = to_string(c.injection);
  kv["model"] = to_string(c.model);
  kv["emit_plots"] = c.emit_plots ? "true" : "false";
  return kv;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << content;
    out.close();
    if (!out) throw Error("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

std::string header_block(const KeyValues& config, const KeyValues& meta) {
  std::string out;
  for (const auto& [k, v] : config) out += "# " + k + " = " + v + "\n";
  for (const auto& [k, v] : meta) out += "# meta." + k + " = " + v + "\n";
  return out;
}

std::string spectrum_csv(const Spectrum& s, const KeyValues& config) {
  KeyValues meta;
  meta["method"] = to_string(s.method);
  meta["channel"] = to_string(s.channel);
  meta["rbw_hz"] = format_double(s.rbw_hz);
  meta["n_averages"] = std::to_string(s.n_averages);
  meta["rabi_hz"] = format_double(s.params.rabi_hz);
  if (s.signal_variance) meta["signal_variance"] = format_double(*s.signal_variance);
  std::string out = header_block(config, meta);
  out += "freq_hz,psd\n";
  for (std::size_t k = 0; k < s.freqs_hz.size(); ++k) {
    out += format_double(s.freqs_hz[k]) + "," + format_double(s.psd[k]) + "\n";
  }
  return out;
}

Spectrum read_spectrum_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read spectrum file '" + path.string() + "'");
  Spectrum s;
  std::string line;
  bool have_rbw = false;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      const std::string body = trim(t.substr(1));
      const auto eq = body.find('=');
      if (eq != std::string::npos && trim(body.substr(0, eq)) == "meta.rbw_hz") {
        s.rbw_hz = parse_number("meta.rbw_hz", body.substr(eq + 1));
        have_rbw = true;
      }
      continue;
    }
    if (t.rfind("freq_hz", 0) == 0) continue;
    const auto comma = t.find(',');
    if (comma == std::string::npos) throw Error("malformed spectrum row in '" + path.string() + "': " + t);
    s.freqs_hz.push_back(parse_number("freq_hz", t.substr(0, comma)));
    s.psd.push_back(parse_number("psd", t.substr(comma + 1)));
  }
  if (!have_rbw) s.rbw_hz = s.freqs_hz.size() > 1 ? s.bin_width_hz() : 1.0;
  s.validate();
  return s;
}

std::string sweep_csv(const SweepResult& sweep, const KeyValues& config) {
  KeyValues meta;
  meta["sweep"] = to_string(sweep.variable);
  if (sweep.trend) {
    meta["trend_law"] = to_string(sweep.trend->law);
    meta["trend_coefficient"] = format_double(sweep.trend->coefficient);
    meta["trend_r_squared"] = format_double(sweep.trend->r_squared);
  }
  if (auto z = signed_splitting_zero(sweep)) meta["splitting_zero"] = format_double(*z);
  std::string out = header_block(config, meta);
  out += "parameter,nu_plus_hz,nu_minus_hz,splitting_hz,ordering,delta_minus1_hz,delta_0_hz,delta_plus1_hz\n";
  for (const auto& pt : sweep.points) {
    const auto& f = pt.freqs;
    out += format_double(pt.parameter) + "," + format_double(f.nu_plus_hz) + "," + format_double(f.nu_minus_hz) + "," +
           format_double(f.splitting_hz) + "," + std::to_string(f.ordering) + "," +
           format_double(f.shifts.delta_minus1_hz) + "," + format_double(f.shifts.delta_0_hz) + "," +
           format_double(f.shifts.delta_plus1_hz) + "\n";
  }
  return out;
}

std::string fit_csv_header() {
  return "source,model,center_hz,splitting_hz,splitting_uncertainty_hz,width_broad_hz,width_hole_hz,amp_broad,"
         "amp_hole,offset,residual_rms,single_peak\n";
}

std::string fit_csv_row(const std::string& source, const FitResult& r) {
  return source + "," + to_string(r.model) + "," + format_double(r.center_hz) + "," + format_double(r.splitting_hz) +
         "," + format_double(r.splitting_uncertainty_hz) + "," + format_double(r.width_broad_hz) + "," +
         format_double(r.width_hole_hz) + "," + format_double(r.amp_broad) + "," + format_double(r.amp_hole) + "," +
         format_double(r.offset) + "," + format_double(r.residual_rms) + "," + (r.single_peak ? "1" : "0") + "\n";
}

std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<PlotSeries>& series) {
  constexpr double kW = 720, kH = 480, kL = 80, kR = 160, kT = 40, kB = 60;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : series)
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      xmin = std::min(xmin, s.x[k]);
      xmax = std::max(xmax, s.x[k]);
      ymin = std::min(ymin, s.y[k]);
      ymax = std::max(ymax, s.y[k]);
    }
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  if (!(ymax > ymin)) ymax = ymin + 1.0;
  const double pw = kW - kL - kR, ph = kH - kT - kB;
  auto px = [&](double x) { return kL + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return kT + ph - (y - ymin) / (ymax - ymin) * ph; };
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                 "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  os << "<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = xmin + (xmax - xmin) * t / 4.0, yv = ymin + (ymax - ymin) * t / 4.0;
    os << "<text x=\"" << px(xv) << "\" y=\"" << kT + ph + 16 << "\" text-anchor=\"middle\">" << xv << "</text>\n";
    os << "<text x=\"" << kL - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << yv << "</text>\n";
  }
  os << "<text x=\"" << kL + pw / 2 << "\" y=\"" << kH - 15 << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
  os << "<text transform=\"translate(18," << kT + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">" << y_label
     << "</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* col = colors[i % 10];
    os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < s.x.size(); ++k) os << px(s.x[k]) << "," << py(s.y[k]) << " ";
    os << "\"/>\n";
    os << "<text x=\"" << kW - kR + 10 << "\" y=\"" << kT + 16 * (i + 1) << "\" fill=\"" << col << "\">" << s.label
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace sns
