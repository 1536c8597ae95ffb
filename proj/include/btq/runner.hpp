#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "btq/asymptotics.hpp"
#include "btq/config.hpp"

namespace btq {

struct Verdict {
  std::string experiment;
  std::string model;
  std::string f_label;
  std::string g_label;
  std::optional<double> slope;
  std::optional<double> r2;
  std::optional<std::pair<int, int>> window;
  bool pass = false;
  bool trivial = false;  // degenerate series, passed without a fit
  std::string detail;
};

struct CalibrationReport {
  double kappa = 0.0;
  std::map<double, double> residuals;  // candidate -> sphere residual at m = 10
  double torus_cross_residual = 0.0;
};

struct RunOutput {
  std::vector<ConvergenceSeries> series;
  std::vector<Verdict> verdicts;
  std::optional<CalibrationReport> calibration;
  // extra files to materialize under the output directory (path, content)
  std::vector<std::pair<std::string, std::string>> artifacts;
  bool all_pass = true;
};

// Candidate search for the Laplacian normalization; throws if no candidate
// reaches 1e-6 (a configuration bug).
CalibrationReport calibrate(const ExperimentConfig& cfg);

// Executes the configured experiments without touching the filesystem.
RunOutput execute(const ExperimentConfig& cfg);

std::string series_csv(const std::vector<ConvergenceSeries>& series);
std::string verdicts_json(const std::vector<Verdict>& verdicts);

// Runs, writes series.csv / verdicts.json / run-manifest.json under
// cfg.out_dir, prints one line per verdict; returns 0 when every verdict
// passes and 2 otherwise.  Execution failures propagate as exceptions (the
// CLI maps them to exit code 1).
int run(const ExperimentConfig& cfg);

// Default observables per experiment and model, as expression strings.
std::vector<std::pair<std::string, std::string>> default_pairs(RunKind kind, ModelKind model,
                                                               unsigned seed);

}  // namespace btq
