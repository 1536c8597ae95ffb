#pragma once

#include <span>
#include <string>
#include <vector>

#include "btq/model.hpp"
#include "btq/observable.hpp"

namespace btq {

// Nodes and weights discretizing integrals against the Liouville measure
// Omega (= omega here): integrate(rule, values) ~ \int_M f Omega for f
// sampled at the nodes.  The metric weight h^m is NOT part of the rule; it
// belongs to the integrand.
struct QuadratureRule {
  ModelKind kind = ModelKind::Sphere;
  int level = 0;
  std::vector<ChartPoint> nodes;
  std::vector<double> weights;
  std::string exactness;

  int radial_points = 0;   // sphere
  int angular_points = 0;  // sphere
  int grid_n = 0;          // torus
  int extra_degree = 0;    // sphere

  std::size_t size() const { return nodes.size(); }
};

// Legendre nodes/weights on [0,1]; exact for polynomials of degree 2n-1.
void gauss_legendre01(int n, std::vector<double>& nodes, std::vector<double>& weights);

// Tensor rule for the sphere.  The substitution t = r^2/(1+r^2) maps the
// radial integral of r^{2j} (1+r^2)^{-(m+2)} type integrands to polynomials
// of degree <= m + extra_degree on [0,1], where Gauss-Legendre is exact; the
// angular factor is a uniform grid that integrates e^{i k theta} exactly for
// all |k| <= 2(m+extra_degree).
QuadratureRule sphere_rule(int m, int extra_degree);

// Uniform N x N grid on the fundamental square, weight 2*pi/N^2 per node.
// Spectrally accurate for the doubly periodic integrands produced by the
// theta sections.
QuadratureRule torus_rule(const KahlerModel& model, int grid_n);

int default_torus_grid(int m, int max_frequency);

// Weighted sum in fixed node order with Neumaier compensation.
Complex integrate(const QuadratureRule& rule, std::span<const Complex> values);
double integrate_real(const QuadratureRule& rule, std::span<const double> values);

// Uniform evaluation grid with about `refinement` points; on the sphere it
// includes z = 0 and a far ring with |x3| = 1 - O(1e-13).
std::vector<ChartPoint> refinement_grid(const KahlerModel& model, int refinement = 512);

// Evaluation grid for sup-norms and residual scans: the union of the
// quadrature nodes of every level in `levels` plus the refinement grid.
// Containing the nodes makes ||T_f|| <= max_grid |f| exact per level.
std::vector<ChartPoint> make_sup_grid(const KahlerModel& model, std::span<const int> levels,
                                      int extra_degree, int refinement = 512);

}  // namespace btq
