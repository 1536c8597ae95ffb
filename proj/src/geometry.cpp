#include "btq/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace btq {

VectorFieldComponents hamiltonian_field(const KahlerModel& model, const Observable& f,
                                        const ChartPoint& p) {
  const Complex df = partial_z(f, model).value(p);
  const Complex dbf = partial_zbar(f, model).value(p);
  const double rho = model.density(p);
  VectorFieldComponents X;
  X.x_z = Complex(0, -1) / rho * dbf;
  X.x_zbar = Complex(0, 1) / rho * df;
  return X;
}

Observable poisson_bracket(const KahlerModel& model, const Observable& f, const Observable& g) {
  if (f.kind() != model.kind() || g.kind() != model.kind())
    throw std::invalid_argument("poisson_bracket: observables do not match model");
  Observable comb = partial_zbar(f, model) * partial_z(g, model) -
                    partial_z(f, model) * partial_zbar(g, model);
  if (model.is_sphere())
    return Complex(0, 1) * comb.times_s_power(-2);
  return Complex(0, model.im_tau() / kPi) * comb;
}

Observable laplacian(const KahlerModel& model, const Observable& f, double kappa) {
  Observable mixed = partial_z(partial_zbar(f, model), model);
  if (model.is_sphere())
    return kappa * mixed.times_s_power(-2);
  return kappa * model.im_tau() / kPi * mixed;
}

double sup_norm(const KahlerModel& model, const Observable& f,
                std::span<const ChartPoint> grid) {
  if (f.kind() != model.kind())
    throw std::invalid_argument("sup_norm: observable does not match model");
  if (!f.is_real())
    throw std::invalid_argument("sup_norm requires a real-valued observable");
  if (grid.empty()) throw std::invalid_argument("sup_norm: empty grid");
  double best = 0.0;
  for (const auto& p : grid) best = std::max(best, std::abs(f.value(p).real()));
  return best;
}

double verify_quantization_condition(const KahlerModel& model, const MetricLog& mlog,
                                     std::span<const ChartPoint> grid) {
  double worst = 0.0;
  for (const auto& p : grid)
    worst = std::max(worst, std::abs(mlog.mixed(p) + model.density(p)));
  return worst;
}

double verify_quantization_condition(const KahlerModel& model, const MetricLog& mlog) {
  std::vector<ChartPoint> grid;
  const int n = 48;
  if (model.is_sphere()) {
    grid.push_back(ChartPoint::sphere(Complex(0, 0)));
    for (int i = 0; i < n; ++i) {
      const double t = (i + 0.5) / n;
      const double r = std::sqrt(t / (1.0 - t));
      for (int j = 0; j < n; ++j)
        grid.push_back(ChartPoint::sphere(std::polar(r, 2.0 * kPi * j / n)));
    }
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        grid.push_back(ChartPoint::torus(i / double(n), j / double(n)));
  }
  return verify_quantization_condition(model, mlog, grid);
}

}  // namespace btq
