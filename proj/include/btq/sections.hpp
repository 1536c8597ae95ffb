#pragma once

#include <functional>
#include <span>
#include <vector>

#include "btq/model.hpp"

namespace btq {

// log(h-hat) of the level-1 metric together with its mixed derivative
// d^2/(dz dzbar); the curvature check in geometry.hpp compares the latter
// against -rho.
struct MetricLog {
  std::function<double(const ChartPoint&)> value;
  std::function<double(const ChartPoint&)> mixed;  // d_zbar d_z log h-hat
};

// Holomorphic section basis of L^m in the chart trivialization.
//
// Sphere: b_k(z) = z^k, k = 0..m, with metric weight (1+|z|^2)^{-m}.
// Torus:  b_k = theta_{k,m}(z) = sum_n exp(i pi m (n + k/m)^2 tau
//                                        + 2 pi i m (n + k/m) z),
//         k = 0..m-1, with Gaussian weight exp(-2 pi m (Im z)^2 / Im tau).
//
// The weighted evaluators return b_k * h-hat^{m/2}; for the torus the
// half-weight is folded into each series term, which keeps every term's
// magnitude <= 1 (the raw theta value and the weight separately overflow /
// underflow at large m).  The series is truncated so that the dropped tail
// is below 1e-14 uniformly on the fundamental square.
class SectionBasis {
 public:
  SectionBasis(const KahlerModel& model, int level);

  const KahlerModel& model() const { return model_; }
  int level() const { return level_; }
  int dim() const { return dim_; }

  Complex evaluate(int k, const ChartPoint& p) const;
  Complex evaluate_weighted(int k, const ChartPoint& p) const;
  Complex derivative_weighted(int k, const ChartPoint& p) const;

  // Fills b_k * h^{m/2} and (d/dz b_k) * h^{m/2} for all k at once.
  void eval_all_weighted(const ChartPoint& p, std::span<Complex> values,
                         std::span<Complex> derivatives) const;

  double metric_weight(const ChartPoint& p) const;  // h-hat^m
  double half_weight(const ChartPoint& p) const;    // h-hat^{m/2}

  Complex connection_potential(const ChartPoint& p) const;  // d_z log h-hat^m
  Complex unit_potential(const ChartPoint& p) const;        // d_z log h-hat

  // Covering-plane evaluation without mod-1 reduction (torus); used by the
  // periodicity checks.
  Complex evaluate_cover(int k, double u, double v) const;
  double metric_weight_cover(double u, double v) const;

  int theta_terms() const { return n_max_; }  // torus truncation half-width

  // Magnitude bound on the first dropped series term, uniform over the
  // fundamental square; stays below 1e-14 by construction.
  double theta_tail_bound() const;

 private:
  KahlerModel model_;
  int level_;
  int dim_;
  int n_max_ = 0;
};

SectionBasis build_basis(const KahlerModel& model, int m);

inline Complex evaluate_section(const SectionBasis& basis, int k, const ChartPoint& p) {
  return basis.evaluate(k, p);
}
inline double metric_weight(const SectionBasis& basis, const ChartPoint& p) {
  return basis.metric_weight(p);
}
inline Complex connection_potential(const SectionBasis& basis, const ChartPoint& p) {
  return basis.connection_potential(p);
}

// Level-1 metric data for the quantization-condition check.
MetricLog metric_log(const KahlerModel& model);

}  // namespace btq
