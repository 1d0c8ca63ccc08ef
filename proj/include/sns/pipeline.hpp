#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sns/io.hpp"

namespace sns {

/// Spectrum for one parameter point using the configured method, on the
/// configured frequency grid.
Spectrum compute_spectrum(const RunConfig& cfg, const SimParams& p);

/// Eigenfrequency sweep -> eigen.csv (+ eigen.svg). Needs a sweep grid.
std::vector<std::filesystem::path> cmd_eigen(const RunConfig& cfg);

/// One spectrum CSV per sweep value (or spectrum.csv without a sweep).
std::vector<std::filesystem::path> cmd_spectrum(const RunConfig& cfg);

/// Fits every input spectrum and writes one FitResult row per input.
std::filesystem::path cmd_fit(const std::vector<std::filesystem::path>& inputs, PeakModel model,
                              const std::filesystem::path& output);

enum class Figure { fig2, fig3, fig4, fig5 };

const char* to_string(Figure f);
Figure figure_from_string(const std::string& s);

/// Default parameters of a figure pipeline before overrides.
RunConfig figure_defaults(Figure f);

struct ReproduceSummary {
  std::filesystem::path directory;
  std::vector<std::filesystem::path> files;
  KeyValues values;  // also written to summary.csv
};

/// Full chain for one figure (sweep -> spectra -> fits -> trend), written to
/// <output_dir>/<figure>/. `overrides` are applied on top of the figure
/// defaults. Stage failures are rethrown naming the stage and parameters.
ReproduceSummary cmd_reproduce(Figure f, const KeyValues& overrides, const std::filesystem::path& output_dir);

}  // namespace sns
