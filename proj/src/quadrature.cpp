#include "btq/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace btq {

namespace {

// Neumaier-compensated accumulator.
struct Compensated {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      carry += (sum - t) + x;
    else
      carry += (x - t) + sum;
    sum = t;
  }
  double total() const { return sum + carry; }
};

}  // namespace

void gauss_legendre01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre01 requires n >= 1");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  // Newton iteration on P_n over [-1,1]; symmetric, so only half computed.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) {
        // one polishing step
        p0 = 1.0;
        p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        x -= p1 / dp;
        break;
      }
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = 0.5 * (1.0 - x);  // descending cos -> ascending t
    weights[i] = 0.5 * w;
    nodes[n - 1 - i] = 0.5 * (1.0 + x);
    weights[n - 1 - i] = 0.5 * w;
  }
}

QuadratureRule sphere_rule(int m, int extra_degree) {
  if (m < 1) throw std::invalid_argument("sphere_rule requires m >= 1");
  if (extra_degree < 0) throw std::invalid_argument("extra_degree must be >= 0");

  QuadratureRule rule;
  rule.kind = ModelKind::Sphere;
  rule.level = m;
  rule.extra_degree = extra_degree;

  const int target_degree = m + extra_degree + 2;
  const int n_r = (target_degree + 2) / 2;  // 2 n_r - 1 >= target_degree
  const int n_a = 2 * (m + extra_degree) + 1;
  rule.radial_points = n_r;
  rule.angular_points = n_a;

  std::vector<double> t, wt;
  gauss_legendre01(n_r, t, wt);

  rule.nodes.reserve(static_cast<std::size_t>(n_r) * n_a);
  rule.weights.reserve(static_cast<std::size_t>(n_r) * n_a);
  const double wa = 2.0 * kPi / n_a;
  for (int i = 0; i < n_r; ++i) {
    const double r = std::sqrt(t[i] / (1.0 - t[i]));
    for (int j = 0; j < n_a; ++j) {
      const double theta = 2.0 * kPi * j / n_a;
      rule.nodes.push_back(ChartPoint::sphere(std::polar(r, theta)));
      rule.weights.push_back(wt[i] * wa);
    }
  }
  rule.exactness = "radial t^j (1-t)^k polynomials to degree " + std::to_string(target_degree) +
                   ", angular modes |k| < " + std::to_string(n_a);
  return rule;
}

QuadratureRule torus_rule(const KahlerModel& model, int grid_n) {
  if (!model.is_torus()) throw std::invalid_argument("torus_rule requires a torus model");
  if (grid_n < 4) throw std::invalid_argument("torus_rule requires N >= 4");

  QuadratureRule rule;
  rule.kind = ModelKind::Torus;
  rule.grid_n = grid_n;
  rule.nodes.reserve(static_cast<std::size_t>(grid_n) * grid_n);
  const double w = 2.0 * kPi / (static_cast<double>(grid_n) * grid_n);
  for (int i = 0; i < grid_n; ++i)
    for (int j = 0; j < grid_n; ++j)
      rule.nodes.push_back(ChartPoint::torus(i / static_cast<double>(grid_n),
                                             j / static_cast<double>(grid_n)));
  rule.weights.assign(rule.nodes.size(), w);
  rule.exactness = "trapezoidal " + std::to_string(grid_n) + "x" + std::to_string(grid_n) +
                   ", spectral for the periodic theta integrands";
  return rule;
}

int default_torus_grid(int m, int max_frequency) {
  // Gaussian width of the weighted theta terms is ~ sqrt(m); 8 sqrt(m) grid
  // lines push the trapezoidal error below 1e-13, with room for the Fourier
  // content of the observables.
  const int n = static_cast<int>(std::ceil(8.0 * std::sqrt(static_cast<double>(m)))) +
                4 * std::max(0, max_frequency);
  return std::max(64, n);
}

Complex integrate(const QuadratureRule& rule, std::span<const Complex> values) {
  if (values.size() != rule.nodes.size())
    throw std::invalid_argument("integrate: value/node length mismatch");
  Compensated re, im;
  for (std::size_t i = 0; i < values.size(); ++i) {
    re.add(rule.weights[i] * values[i].real());
    im.add(rule.weights[i] * values[i].imag());
  }
  return Complex(re.total(), im.total());
}

double integrate_real(const QuadratureRule& rule, std::span<const double> values) {
  if (values.size() != rule.nodes.size())
    throw std::invalid_argument("integrate: value/node length mismatch");
  Compensated acc;
  for (std::size_t i = 0; i < values.size(); ++i) acc.add(rule.weights[i] * values[i]);
  return acc.total();
}

std::vector<ChartPoint> refinement_grid(const KahlerModel& model, int refinement) {
  std::vector<ChartPoint> grid;
  if (model.is_sphere()) {
    const int n_t = std::max(4, static_cast<int>(std::sqrt(refinement / 2.0)));
    const int n_a = std::max(8, refinement / n_t);
    grid.push_back(ChartPoint::sphere(Complex(0, 0)));
    for (int i = 0; i < n_t; ++i) {
      const double t = (i + 0.5) / n_t;
      const double r = std::sqrt(t / (1.0 - t));
      for (int j = 0; j < n_a; ++j)
        grid.push_back(ChartPoint::sphere(std::polar(r, 2.0 * kPi * j / n_a)));
    }
    // far ring: x3 = 1 - 2t is resolved to ~2e-13 at the antipode
    const double t_far = 1.0 - 1e-13;
    const double r_far = std::sqrt(t_far / (1.0 - t_far));
    for (int j = 0; j < n_a; ++j)
      grid.push_back(ChartPoint::sphere(std::polar(r_far, 2.0 * kPi * j / n_a)));
  } else {
    const int n = std::max(8, static_cast<int>(std::ceil(std::sqrt(double(refinement)))));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        grid.push_back(ChartPoint::torus(i / static_cast<double>(n), j / static_cast<double>(n)));
  }
  return grid;
}

std::vector<ChartPoint> make_sup_grid(const KahlerModel& model, std::span<const int> levels,
                                      int extra_degree, int refinement) {
  std::vector<ChartPoint> grid;
  for (int m : levels) {
    if (model.is_sphere()) {
      auto rule = sphere_rule(m, extra_degree);
      grid.insert(grid.end(), rule.nodes.begin(), rule.nodes.end());
    } else {
      auto rule = torus_rule(model, default_torus_grid(m, std::max(4, extra_degree)));
      grid.insert(grid.end(), rule.nodes.begin(), rule.nodes.end());
    }
  }
  auto fine = refinement_grid(model, refinement);
  grid.insert(grid.end(), fine.begin(), fine.end());
  return grid;
}

}  // namespace btq
