#pragma once

#include <map>
#include <string>

#include "btq/model.hpp"

namespace btq {

// Smooth functions on the model manifolds, stored in a canonical monomial
// form so that holomorphic/antiholomorphic derivatives, products and Poisson
// brackets are computed symbolically (no numerical differentiation in the
// main pipeline).
//
// Sphere: the algebra generated by the embedding coordinates
//   x1 = (z + zbar) s,  x2 = -i (z - zbar) s,  x3 = 2 s - 1,
// with s = 1/(1+|z|^2), is represented by Laurent-type monomials
// z^a zbar^b s^c.  The relation z zbar s^c = s^{c-1} - s^c (c != 0) is
// applied eagerly, which keeps the representation canonical and every
// retained monomial of a polynomial in the atoms uniformly bounded on the
// chart.
//
// Torus: trigonometric polynomials, stored as Fourier monomials
// e(a,b) = exp(2 pi i (a u + b v)).  Their z-derivatives are constant
// multiples of the monomials themselves, with factors depending on tau, so
// the derivative operators take the model as an argument.
class Observable {
 public:
  struct SphereMono {
    int zp = 0;   // power of z
    int zbp = 0;  // power of zbar
    int sp = 0;   // power of s = 1/(1+|z|^2), may be negative transiently
    auto operator<=>(const SphereMono&) const = default;
  };
  struct TorusMono {
    int a = 0;
    int b = 0;
    auto operator<=>(const TorusMono&) const = default;
  };

  static Observable constant(ModelKind kind, Complex c);
  static Observable zero(ModelKind kind) { return constant(kind, Complex(0, 0)); }

  // Sphere atoms.
  static Observable x1();
  static Observable x2();
  static Observable x3();

  // Torus atoms cos(2 pi (a u + b v)) and sin(2 pi (a u + b v)).
  static Observable fourier_cos(int a, int b);
  static Observable fourier_sin(int a, int b);

  ModelKind kind() const { return kind_; }
  bool empty() const;
  std::size_t term_count() const;

  Complex value(const ChartPoint& p) const;

  // Exact coefficient-symmetry test for real-valuedness.
  bool is_real() const;
  double real_value(const ChartPoint& p) const;

  // Degree bounds used by the quadrature module to choose a rule exact for
  // <b_j, f b_k> integrands; see quadrature.hpp.
  int sphere_extra_degree() const;
  int torus_max_frequency() const;

  Observable& operator+=(const Observable& o);
  Observable& operator-=(const Observable& o);
  Observable& operator*=(const Observable& o);
  Observable& operator*=(Complex c);

  friend Observable operator+(Observable a, const Observable& b) { return a += b; }
  friend Observable operator-(Observable a, const Observable& b) { return a -= b; }
  friend Observable operator*(Observable a, const Observable& b) { return a *= b; }
  friend Observable operator*(Observable a, Complex c) { return a *= c; }
  friend Observable operator*(Complex c, Observable a) { return a *= c; }
  friend Observable operator*(Observable a, double c) { return a *= Complex(c, 0); }
  friend Observable operator*(double c, Observable a) { return a *= Complex(c, 0); }
  friend Observable operator-(Observable a) { return a *= Complex(-1, 0); }

  friend Observable partial_z(const Observable& f, const KahlerModel& model);
  friend Observable partial_zbar(const Observable& f, const KahlerModel& model);
  friend Observable conj(const Observable& f);

  // Multiplication by s^k on the sphere (k may be negative); used for the
  // 1/rho factors in the Poisson bracket and the Laplacian.
  Observable times_s_power(int k) const;

  std::string debug_string() const;

 private:
  explicit Observable(ModelKind kind) : kind_(kind) {}
  void add_sphere_term(SphereMono m, Complex c);
  void add_torus_term(TorusMono m, Complex c);
  void require_kind(const Observable& o) const;

  ModelKind kind_;
  std::map<SphereMono, Complex> smono_;
  std::map<TorusMono, Complex> tmono_;
};

Observable partial_z(const Observable& f, const KahlerModel& model);
Observable partial_zbar(const Observable& f, const KahlerModel& model);
Observable conj(const Observable& f);

// d/dz and d/dzbar of exp(2 pi i (a u + b v)) divided by the monomial itself.
Complex torus_dz_factor(const KahlerModel& model, int a, int b);
Complex torus_dzbar_factor(const KahlerModel& model, int a, int b);

}  // namespace btq
