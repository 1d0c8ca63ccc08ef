#include <algorithm>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "sns/pipeline.hpp"

namespace {

using sns::KeyValues;

KeyValues parse_sets(const std::vector<std::string>& sets) {
  KeyValues kv;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw sns::UsageError("--set expects key=value, got '" + s + "'");
    kv[s.substr(0, eq)] = s.substr(eq + 1);
  }
  return kv;
}

// config file, then --set pairs, then the output directory (env, then flag)
KeyValues gather(const std::string& config_path, const std::vector<std::string>& sets, const std::string& out_flag) {
  KeyValues kv;
  if (!config_path.empty()) kv = sns::read_config_file(config_path);
  // a flag replaces its alternatives from the file instead of conflicting
  static const std::vector<std::vector<std::string>> exclusive{
      {"rabi_mhz", "power_mw"}, {"power_grid_mw", "theta_grid_deg", "detuning_grid_ghz"}};
  const KeyValues flags = parse_sets(sets);
  for (const auto& group : exclusive) {
    const auto given = std::count_if(group.begin(), group.end(), [&](const auto& k) { return flags.count(k) > 0; });
    if (given > 1) throw sns::UsageError("conflicting --set keys: only one of " + group.front() + ", ... may be given");
  }
  for (auto& [k, v] : flags) {
    for (const auto& group : exclusive)
      if (std::find(group.begin(), group.end(), k) != group.end())
        for (const auto& other : group) kv.erase(other);
    kv[k] = v;
  }
  if (const char* env = std::getenv("SNS_OUTPUT_DIR"); env && *env) kv["output_dir"] = env;
  if (!out_flag.empty()) kv["output_dir"] = out_flag;
  return kv;
}

void warn_regime(const sns::RunConfig& cfg) {
  const std::string w = sns::regime_warning(cfg.resolved_params());
  if (!w.empty()) std::cerr << "warning: " << w << "\n";
}

void list(const std::vector<std::filesystem::path>& files) {
  for (const auto& f : files) std::cout << f.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spin noise spectra and light-shift splitting of a spin-1 ground manifold"};
  app.require_subcommand(1);

  std::string config_path, out_flag;
  std::vector<std::string> sets;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
    sub->add_option("-s,--set", sets, "override, e.g. --set power_mw=3 (repeatable)");
    sub->add_option("-o,--output-dir", out_flag, "output directory");
  };

  auto* eigen = app.add_subcommand("eigen", "eigenfrequency sweep -> eigen.csv");
  add_common(eigen);
  auto* spectrum = app.add_subcommand("spectrum", "noise spectrum (one CSV per sweep value)");
  add_common(spectrum);

  auto* fit = app.add_subcommand("fit", "fit spectrum CSVs -> one FitResult row per input");
  std::vector<std::string> inputs;
  std::string model = "two_lorentzians", fit_output;
  fit->add_option("inputs", inputs, "spectrum CSV files")->required()->check(CLI::ExistingFile);
  fit->add_option("-m,--model", model, "hole | two_lorentzians | single_lorentzian");
  fit->add_option("-o,--output", fit_output, "output CSV (default <output_dir>/fits.csv)");

  auto* reproduce = app.add_subcommand("reproduce", "full pipeline for fig2 | fig3 | fig4 | fig5");
  std::string figure;
  reproduce->add_option("figure", figure, "fig2 | fig3 | fig4 | fig5")->required();
  add_common(reproduce);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (eigen->parsed() || spectrum->parsed()) {
      const sns::RunConfig cfg =
          sns::apply_key_values(sns::default_config(), gather(config_path, sets, out_flag));
      warn_regime(cfg);
      list(eigen->parsed() ? sns::cmd_eigen(cfg) : sns::cmd_spectrum(cfg));
    } else if (fit->parsed()) {
      std::filesystem::path out = fit_output;
      if (out.empty()) {
        const char* env = std::getenv("SNS_OUTPUT_DIR");
        out = std::filesystem::path(env && *env ? env : "sns_out") / "fits.csv";
      }
      std::vector<std::filesystem::path> paths(inputs.begin(), inputs.end());
      sns::PeakModel m;
      try {
        m = sns::peak_model_from_string(model);
      } catch (const std::exception& e) {
        throw sns::UsageError(e.what());
      }
      std::cout << sns::cmd_fit(paths, m, out).string() << "\n";
    } else if (reproduce->parsed()) {
      const sns::Figure f = sns::figure_from_string(figure);
      KeyValues kv = gather(config_path, sets, out_flag);
      std::filesystem::path dir = "sns_out";
      if (auto it = kv.find("output_dir"); it != kv.end()) {
        dir = it->second;
        kv.erase(it);
      }
      warn_regime(sns::apply_key_values(sns::figure_defaults(f), kv));
      const sns::ReproduceSummary s = sns::cmd_reproduce(f, kv, dir);
      list(s.files);
      for (const auto& [k, v] : s.values) std::cout << k << " = " << v << "\n";
    }
  } catch (const sns::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
