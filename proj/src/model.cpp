#include "btq/model.hpp"

namespace btq {

const char* model_name(ModelKind kind) {
  return kind == ModelKind::Sphere ? "sphere" : "torus";
}

ChartPoint ChartPoint::sphere(Complex z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw std::invalid_argument("sphere chart point must be finite");
  ChartPoint p;
  p.kind = ModelKind::Sphere;
  p.z = z;
  return p;
}

ChartPoint ChartPoint::torus(double u, double v) {
  if (!std::isfinite(u) || !std::isfinite(v))
    throw std::invalid_argument("torus chart point must be finite");
  ChartPoint p;
  p.kind = ModelKind::Torus;
  p.u = u - std::floor(u);
  p.v = v - std::floor(v);
  // floor can round x - floor(x) up to 1.0 for tiny negative inputs
  if (p.u >= 1.0) p.u = 0.0;
  if (p.v >= 1.0) p.v = 0.0;
  return p;
}

KahlerModel KahlerModel::sphere() { return KahlerModel(ModelKind::Sphere, Complex(0, 0)); }

KahlerModel KahlerModel::torus(Complex tau) {
  if (!(tau.imag() > 0.0))
    throw std::invalid_argument("torus modulus requires Im tau > 0");
  return KahlerModel(ModelKind::Torus, tau);
}

Complex KahlerModel::tau() const {
  if (!is_torus()) throw std::logic_error("tau is defined for the torus only");
  return tau_;
}

double KahlerModel::im_tau() const { return tau().imag(); }

double KahlerModel::density(const ChartPoint& p) const {
  if (p.kind != kind_) throw std::invalid_argument("chart point does not match model");
  if (is_sphere()) {
    const double r2 = std::norm(p.z);
    const double a = 1.0 + r2;
    return 1.0 / (a * a);
  }
  return kPi / tau_.imag();
}

Complex KahlerModel::cover_z(const ChartPoint& p) const {
  if (!is_torus() || p.kind != ModelKind::Torus)
    throw std::invalid_argument("cover_z expects a torus point");
  return Complex(p.u, 0.0) + p.v * tau_;
}

double kahler_density(const KahlerModel& model, const ChartPoint& p) {
  return model.density(p);
}

}  // namespace btq
