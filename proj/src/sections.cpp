#include "btq/sections.hpp"

#include <cmath>
#include <stdexcept>

namespace btq {

namespace {

void check_index(int k, int dim) {
  if (k < 0 || k >= dim) throw std::out_of_range("section index out of range");
}

}  // namespace

SectionBasis::SectionBasis(const KahlerModel& model, int level)
    : model_(model), level_(level) {
  if (level < 1) throw std::invalid_argument("section basis requires m >= 1");
  if (model.is_sphere()) {
    dim_ = level + 1;
  } else {
    dim_ = level;
    // Dropped terms satisfy |term| <= exp(-pi m Im(tau) (n^2 - 2n)) on the
    // fundamental square; this bound keeps the tail under 1e-14.
    const double im = model.im_tau();
    n_max_ = static_cast<int>(std::ceil(std::sqrt(14.0 * std::log(10.0) / (kPi * level * im)))) + 2;
  }
}

Complex SectionBasis::evaluate(int k, const ChartPoint& p) const {
  check_index(k, dim_);
  if (model_.is_sphere()) {
    if (k == 0) return Complex(1, 0);
    return std::pow(p.z, k);
  }
  return evaluate_cover(k, p.u, p.v);
}

Complex SectionBasis::evaluate_cover(int k, double u, double v) const {
  check_index(k, dim_);
  if (model_.is_sphere()) throw std::logic_error("evaluate_cover is a torus operation");
  const Complex tau = model_.tau();
  const Complex z = Complex(u, 0) + v * tau;
  Complex acc(0, 0);
  for (int n = -n_max_; n <= n_max_; ++n) {
    const double q = n + static_cast<double>(k) / level_;
    const Complex w = Complex(0, kPi * level_) * (q * q * tau + 2.0 * q * z);
    acc += std::exp(w);
  }
  return acc;
}

double SectionBasis::metric_weight(const ChartPoint& p) const {
  if (model_.is_sphere()) {
    return std::exp(-level_ * std::log1p(std::norm(p.z)));
  }
  return metric_weight_cover(p.u, p.v);
}

double SectionBasis::metric_weight_cover(double u, double v) const {
  (void)u;
  const double y = v * model_.im_tau();
  return std::exp(-2.0 * kPi * level_ * y * y / model_.im_tau());
}

double SectionBasis::half_weight(const ChartPoint& p) const {
  if (model_.is_sphere())
    return std::exp(-0.5 * level_ * std::log1p(std::norm(p.z)));
  const double y = p.v * model_.im_tau();
  return std::exp(-kPi * level_ * y * y / model_.im_tau());
}

Complex SectionBasis::connection_potential(const ChartPoint& p) const {
  return static_cast<double>(level_) * unit_potential(p);
}

Complex SectionBasis::unit_potential(const ChartPoint& p) const {
  if (model_.is_sphere()) {
    return -std::conj(p.z) / (1.0 + std::norm(p.z));
  }
  const double y = p.v * model_.im_tau();
  return Complex(0, 2.0 * kPi * y / model_.im_tau());
}

void SectionBasis::eval_all_weighted(const ChartPoint& p, std::span<Complex> values,
                                     std::span<Complex> derivatives) const {
  if (values.size() != static_cast<std::size_t>(dim_) ||
      derivatives.size() != static_cast<std::size_t>(dim_))
    throw std::invalid_argument("eval_all_weighted: bad span sizes");

  if (model_.is_sphere()) {
    const double w_half = half_weight(p);
    Complex power(w_half, 0.0);  // z^k h^{m/2}
    for (int k = 0; k < dim_; ++k) {
      values[k] = power;
      derivatives[k] = (k == 0) ? Complex(0, 0) : static_cast<double>(k) * values[k - 1];
      power *= p.z;
    }
    return;
  }

  const Complex tau = model_.tau();
  const double im = tau.imag();
  const double x = p.u + p.v * tau.real();
  const double y = p.v * im;
  for (int k = 0; k < dim_; ++k) {
    Complex acc(0, 0), dacc(0, 0);
    for (int n = -n_max_; n <= n_max_; ++n) {
      const double q = n + static_cast<double>(k) / level_;
      // Exponent of term * h^{m/2}; its real part is -(pi m/Im tau)(y + q Im tau)^2,
      // so every term stays bounded by 1.
      const double shift = y + q * im;
      const double w_re = -kPi * level_ * shift * shift / im;
      const double w_im = kPi * level_ * (q * q * tau.real() + 2.0 * q * x);
      const Complex term = std::exp(w_re) * Complex(std::cos(w_im), std::sin(w_im));
      acc += term;
      dacc += Complex(0, 2.0 * kPi * level_ * q) * term;
    }
    values[k] = acc;
    derivatives[k] = dacc;
  }
}

Complex SectionBasis::evaluate_weighted(int k, const ChartPoint& p) const {
  check_index(k, dim_);
  std::vector<Complex> vals(dim_), ders(dim_);
  eval_all_weighted(p, vals, ders);
  return vals[k];
}

Complex SectionBasis::derivative_weighted(int k, const ChartPoint& p) const {
  check_index(k, dim_);
  std::vector<Complex> vals(dim_), ders(dim_);
  eval_all_weighted(p, vals, ders);
  return ders[k];
}

double SectionBasis::theta_tail_bound() const {
  if (model_.is_sphere()) return 0.0;
  // |term(n)| <= exp(-pi m Im(tau) (q^2 - 2|q|)) with |q| >= n_max on the
  // fundamental square (y in [0, Im tau))
  const double n = n_max_;
  return std::exp(-kPi * level_ * model_.im_tau() * (n * n - 2.0 * n));
}

SectionBasis build_basis(const KahlerModel& model, int m) { return SectionBasis(model, m); }

MetricLog metric_log(const KahlerModel& model) {
  MetricLog log;
  if (model.is_sphere()) {
    log.value = [](const ChartPoint& p) { return -std::log1p(std::norm(p.z)); };
    log.mixed = [](const ChartPoint& p) {
      const double a = 1.0 + std::norm(p.z);
      return -1.0 / (a * a);
    };
  } else {
    const double im = model.im_tau();
    log.value = [im](const ChartPoint& p) {
      const double y = p.v * im;
      return -2.0 * kPi * y * y / im;
    };
    log.mixed = [im](const ChartPoint&) { return -kPi / im; };
  }
  return log;
}

}  // namespace btq
