#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "btq/toeplitz.hpp"

namespace btq {

// One decaying quantity sampled along a ladder of levels.
struct ConvergenceSeries {
  std::string experiment;
  std::string model;
  std::string f_label;
  std::string g_label;
  std::string quadrature;
  std::vector<int> m;
  std::vector<double> value;

  void push(int level, double v);
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  bool degenerate = false;
  int points = 0;
  int window_lo = 0;
  int window_hi = 0;
};

inline constexpr double kDegenerateFloor = 1e-13;

// Least squares on (log m, log value) inside the window.  Series touching
// the floor anywhere in the window carry no slope claim and come back with
// `degenerate` set.  Fewer than 4 usable points is an error.
SlopeFit fit_slope(const ConvergenceSeries& series, int window_lo, int window_hi,
                   double floor = kDegenerateFloor);

enum class ExperimentKind {
  NormDeficit,
  Commutator,
  Star1,
  Star2,
  Tuynman,
  Adjointness,
};

const char* experiment_name(ExperimentKind kind);

struct SweepOptions {
  int extra_degree = 8;  // sphere rule slack; raised automatically per observable content
  int torus_grid = 0;    // 0 = automatic
  int m_ref = 96;        // reference level for the star-2 coefficient estimate
  double kappa = kLaplaceKappa;
  int sup_refinement = 512;
  unsigned seed = 20240901;   // adjointness test operators
  int adjointness_pairs = 10;
};

// Shared per-level contexts; levels are expensive to build and several
// experiments reuse them.
class ContextCache {
 public:
  std::shared_ptr<const ToeplitzContext> get(const KahlerModel& model, int m, int extra_degree,
                                             int torus_grid);

 private:
  struct Key {
    ModelKind kind;
    double tau_re, tau_im;
    int m, extra, grid;
    auto operator<=>(const Key&) const = default;
  };
  std::map<Key, std::shared_ptr<const ToeplitzContext>> cache_;
};

int required_extra_degree(ExperimentKind kind, const KahlerModel& model, const Observable& f,
                          const Observable* g, const SweepOptions& opt);
int required_torus_grid(ExperimentKind kind, const KahlerModel& model, int m, const Observable& f,
                        const Observable* g, const SweepOptions& opt);

// Coherent-state estimate of the first star-product coefficient:
// C1_hat(p) = m_ref * sigma(T_f T_g - T_{fg})(p), evaluable at any chart
// point, which lets lower levels reuse one reference-level estimate without
// interpolation.
class C1Estimator {
 public:
  C1Estimator(std::shared_ptr<const ToeplitzContext> ctx, OperatorMatrix defect);
  Complex value(const ChartPoint& p) const;
  Vector values_on(const QuadratureRule& rule) const;
  SymbolField field() const;  // on the reference nodes
  int m_ref() const { return ctx_->level(); }

 private:
  std::shared_ptr<const ToeplitzContext> ctx_;
  OperatorMatrix defect_;
};

C1Estimator estimate_c1(const KahlerModel& model, const Observable& f, const Observable& g,
                        int m_ref, const SweepOptions& opt = {}, ContextCache* cache = nullptr);

// max over the reference nodes of |C1_hat(f,g) - C1_hat(g,f) + i {f,g}|.
double c1_antisymmetry_residual(const KahlerModel& model, const Observable& f, const Observable& g,
                                int m_ref, const SweepOptions& opt = {},
                                ContextCache* cache = nullptr);

// N = 1: ||T_f T_g - T_{fg}||.
// N = 2: ||T_f T_g - T_{fg} - (1/m) T_{C1_hat}|| with the supplied estimate.
double star_truncation_residual(const ToeplitzContext& ctx, const Observable& f,
                                const Observable& g, int order,
                                const C1Estimator* c1 = nullptr);

// Runs one experiment along the level ladder.  `g` is required for the
// commutator and star kinds and ignored otherwise.  Failures at a level are
// rethrown with the level attached.
ConvergenceSeries sweep(const KahlerModel& model, const Observable& f, const Observable* g,
                        ExperimentKind kind, const std::vector<int>& m_list,
                        const SweepOptions& opt = {}, ContextCache* cache = nullptr);

}  // namespace btq
