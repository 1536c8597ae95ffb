#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

namespace btq {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

enum class ModelKind { Sphere, Torus };

const char* model_name(ModelKind kind);

// Chart coordinates.  The sphere works in the finite chart z (the point at
// infinity is only ever approached as a limit); the torus works on the
// fundamental square (u, v) in [0,1)^2 with z = u + v*tau on the covering
// plane.
struct ChartPoint {
  ModelKind kind = ModelKind::Sphere;
  Complex z{0.0, 0.0};    // sphere chart coordinate
  double u = 0.0;         // torus coordinates, reduced mod 1
  double v = 0.0;

  static ChartPoint sphere(Complex z);
  static ChartPoint torus(double u, double v);
};

// One of the two model geometries.  The Kahler form is omega = i*rho dz^dzbar
// with rho = 1/(1+|z|^2)^2 on the sphere and rho = pi/Im(tau) on the torus.
class KahlerModel {
 public:
  static KahlerModel sphere();
  static KahlerModel torus(Complex tau);

  ModelKind kind() const { return kind_; }
  bool is_sphere() const { return kind_ == ModelKind::Sphere; }
  bool is_torus() const { return kind_ == ModelKind::Torus; }

  // Torus modulus; throws for the sphere.
  Complex tau() const;
  double im_tau() const;

  double density(const ChartPoint& p) const;

  // Covering-plane coordinate z = u + v*tau of a torus chart point.
  Complex cover_z(const ChartPoint& p) const;

  // Total symplectic volume; 2*pi for both models.
  double volume() const { return 2.0 * kPi; }

 private:
  KahlerModel(ModelKind kind, Complex tau) : kind_(kind), tau_(tau) {}
  ModelKind kind_;
  Complex tau_;
};

double kahler_density(const KahlerModel& model, const ChartPoint& p);

}  // namespace btq
