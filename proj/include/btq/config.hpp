#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "btq/model.hpp"

namespace btq {

enum class RunKind { Dims, Calibrate, Norm, Commutator, Star, Tuynman, Epsilon, Adjointness, All };

const char* run_kind_name(RunKind kind);

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& message)
      : std::runtime_error("config line " + std::to_string(line) + ": " + message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Plain "key = value" configuration, one key per line, '#' comments.
// Defaults are filled in so the parsed object is the complete record of the
// run parameters (it is echoed into run-manifest.json).
struct ExperimentConfig {
  ModelKind model = ModelKind::Sphere;
  bool model_set = false;  // unset + kind 'all' runs both models
  Complex tau{0.0, 1.0};
  RunKind kind = RunKind::All;
  std::vector<std::string> f_exprs;
  std::vector<std::string> g_exprs;
  std::vector<int> m_list;  // empty: per-kind default ladder
  std::vector<int> c1_ladder{16, 32, 64, 96};
  int m_ref = 96;
  int extra_degree = 8;
  int torus_grid = 0;  // 0 = automatic
  int sup_refinement = 512;
  int threads = 1;
  unsigned seed = 20240901;
  std::string out_dir = "btq-out";
  int window_lo = 8;
  int window_hi = 128;
  double tol_tuynman = -1.0;  // < 0: model default (1e-8 sphere, 1e-7 torus)
  double tol_adjointness = 1e-9;
  double tol_epsilon = 1e-10;
  double degenerate_floor = 1e-13;
  bool dump_matrices = false;  // write T_f per level under <out>/matrices/
};

ExperimentConfig parse_config(const std::string& text);

std::vector<int> parse_m_list(const std::string& text);  // "8,16,32" -> {8,16,32}

}  // namespace btq
