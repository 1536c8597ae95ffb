#pragma once

// Shared oracles for the test suites.  Everything here is deliberately
// independent of the library's evaluation paths: finite differences, direct
// series summation, Beta-function closed forms.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "btq/geometry.hpp"
#include "btq/model.hpp"
#include "btq/observable.hpp"

namespace btq::test {

// Chart point displaced by a complex step h (torus: through the covering
// coordinates, so steps can cross the fundamental square).
inline ChartPoint shift_point(const KahlerModel& model, const ChartPoint& p, Complex h) {
  if (model.is_sphere()) return ChartPoint::sphere(p.z + h);
  const Complex tau = model.tau();
  const double dv = h.imag() / tau.imag();
  const double du = h.real() - dv * tau.real();
  return ChartPoint::torus(p.u + du, p.v + dv);
}

// Central-difference d/dz and d/dzbar.
inline Complex fd_partial_z(const KahlerModel& model, const Observable& f, const ChartPoint& p,
                            double h = 1e-5) {
  const Complex fx_p = f.value(shift_point(model, p, Complex(h, 0)));
  const Complex fx_m = f.value(shift_point(model, p, Complex(-h, 0)));
  const Complex fy_p = f.value(shift_point(model, p, Complex(0, h)));
  const Complex fy_m = f.value(shift_point(model, p, Complex(0, -h)));
  return ((fx_p - fx_m) - Complex(0, 1) * (fy_p - fy_m)) / (4.0 * h);
}

inline Complex fd_partial_zbar(const KahlerModel& model, const Observable& f, const ChartPoint& p,
                               double h = 1e-5) {
  const Complex fx_p = f.value(shift_point(model, p, Complex(h, 0)));
  const Complex fx_m = f.value(shift_point(model, p, Complex(-h, 0)));
  const Complex fy_p = f.value(shift_point(model, p, Complex(0, h)));
  const Complex fy_m = f.value(shift_point(model, p, Complex(0, -h)));
  return ((fx_p - fx_m) + Complex(0, 1) * (fy_p - fy_m)) / (4.0 * h);
}

// 5-point-stencil Laplacian (kappa/rho) d_z d_zbar f with
// d_z d_zbar = (f_xx + f_yy)/4.
inline double fd_laplacian(const KahlerModel& model, const Observable& f, const ChartPoint& p,
                           double kappa, double h = 1e-4) {
  const double c = f.value(p).real();
  const double xp = f.value(shift_point(model, p, Complex(h, 0))).real();
  const double xm = f.value(shift_point(model, p, Complex(-h, 0))).real();
  const double yp = f.value(shift_point(model, p, Complex(0, h))).real();
  const double ym = f.value(shift_point(model, p, Complex(0, -h))).real();
  const double flat = (xp + xm + yp + ym - 4.0 * c) / (h * h);
  return kappa / model.density(p) * flat / 4.0;
}

// <z^k, z^k> at level m: 2 pi k! (m-k)! / (m+1)! = 2 pi / ((m+1) binom(m,k)).
inline double beta_gram_oracle(int m, int k) {
  double binom = 1.0;
  for (int i = 1; i <= k; ++i) binom *= double(m - k + i) / double(i);
  return 2.0 * kPi / ((m + 1) * binom);
}

// Direct theta summation with a wide fixed window, no clever truncation.
inline Complex theta_brute(Complex tau, int m, int k, double u, double v, int n_range = 100) {
  const Complex z = Complex(u, 0) + v * tau;
  Complex acc(0, 0);
  for (int n = -n_range; n <= n_range; ++n) {
    const double q = n + double(k) / m;
    acc += std::exp(Complex(0, kPi * m) * (q * q * tau + 2.0 * q * z));
  }
  return acc;
}

// dbar estimate from a contour integral: oint f dz ~ 2 i Area dbar f.
template <typename F>
Complex loop_dbar(F&& f, Complex center, double radius = 0.05, int points = 64) {
  Complex acc(0, 0);
  for (int j = 0; j < points; ++j) {
    const double t = 2.0 * kPi * j / points;
    const Complex z = center + std::polar(radius, t);
    const Complex dz = Complex(0, 1) * std::polar(radius, t) * (2.0 * kPi / points);
    acc += f(z) * dz;
  }
  return acc / (Complex(0, 2) * kPi * radius * radius);
}

inline std::vector<ChartPoint> random_points(const KahlerModel& model, std::mt19937_64& rng,
                                             int n, double sphere_radius = 2.0) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<ChartPoint> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (model.is_sphere()) {
      const double r = sphere_radius * uni(rng);
      pts.push_back(ChartPoint::sphere(std::polar(r, 2.0 * kPi * uni(rng))));
    } else {
      pts.push_back(ChartPoint::torus(uni(rng), uni(rng)));
    }
  }
  return pts;
}

inline Observable random_atom_poly(ModelKind kind, std::mt19937_64& rng, int degree = 2) {
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  Observable out = Observable::constant(kind, Complex(coeff(rng), 0));
  std::vector<Observable> atoms;
  if (kind == ModelKind::Sphere)
    atoms = {Observable::x1(), Observable::x2(), Observable::x3()};
  else
    atoms = {Observable::fourier_cos(1, 0), Observable::fourier_sin(1, 0),
             Observable::fourier_cos(0, 1), Observable::fourier_sin(1, 1)};
  for (const auto& a : atoms) out += coeff(rng) * a;
  if (degree >= 2)
    for (std::size_t i = 0; i < atoms.size(); ++i)
      for (std::size_t j = i; j < atoms.size(); ++j) out += coeff(rng) * (atoms[i] * atoms[j]);
  return out;
}

}  // namespace btq::test
