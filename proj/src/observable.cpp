#include "btq/observable.hpp"

#include <cmath>
#include <sstream>

namespace btq {

namespace {

constexpr double kCoeffZero = 0.0;

bool nearly_conjugate(Complex a, Complex b, double scale) {
  return std::abs(a - std::conj(b)) <= 1e-12 * scale;
}

}  // namespace

Observable Observable::constant(ModelKind kind, Complex c) {
  Observable f(kind);
  if (kind == ModelKind::Sphere)
    f.add_sphere_term(SphereMono{0, 0, 0}, c);
  else
    f.add_torus_term(TorusMono{0, 0}, c);
  return f;
}

Observable Observable::x1() {
  Observable f(ModelKind::Sphere);
  f.add_sphere_term(SphereMono{1, 0, 1}, Complex(1, 0));
  f.add_sphere_term(SphereMono{0, 1, 1}, Complex(1, 0));
  return f;
}

Observable Observable::x2() {
  Observable f(ModelKind::Sphere);
  f.add_sphere_term(SphereMono{1, 0, 1}, Complex(0, -1));
  f.add_sphere_term(SphereMono{0, 1, 1}, Complex(0, 1));
  return f;
}

Observable Observable::x3() {
  // (1 - |z|^2) s reduces to 2 s - 1.
  Observable f(ModelKind::Sphere);
  f.add_sphere_term(SphereMono{0, 0, 1}, Complex(2, 0));
  f.add_sphere_term(SphereMono{0, 0, 0}, Complex(-1, 0));
  return f;
}

Observable Observable::fourier_cos(int a, int b) {
  Observable f(ModelKind::Torus);
  f.add_torus_term(TorusMono{a, b}, Complex(0.5, 0));
  f.add_torus_term(TorusMono{-a, -b}, Complex(0.5, 0));
  return f;
}

Observable Observable::fourier_sin(int a, int b) {
  Observable f(ModelKind::Torus);
  f.add_torus_term(TorusMono{a, b}, Complex(0, -0.5));
  f.add_torus_term(TorusMono{-a, -b}, Complex(0, 0.5));
  return f;
}

bool Observable::empty() const { return smono_.empty() && tmono_.empty(); }

std::size_t Observable::term_count() const {
  return kind_ == ModelKind::Sphere ? smono_.size() : tmono_.size();
}

void Observable::add_sphere_term(SphereMono m, Complex c) {
  if (c == Complex(kCoeffZero, kCoeffZero)) return;
  if (m.zp > 0 && m.zbp > 0 && m.sp != 0) {
    // z zbar s^c = s^{c-1} - s^c
    add_sphere_term(SphereMono{m.zp - 1, m.zbp - 1, m.sp - 1}, c);
    add_sphere_term(SphereMono{m.zp - 1, m.zbp - 1, m.sp}, -c);
    return;
  }
  auto [it, inserted] = smono_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == Complex(0, 0)) smono_.erase(it);
  }
}

void Observable::add_torus_term(TorusMono m, Complex c) {
  if (c == Complex(kCoeffZero, kCoeffZero)) return;
  auto [it, inserted] = tmono_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == Complex(0, 0)) tmono_.erase(it);
  }
}

void Observable::require_kind(const Observable& o) const {
  if (kind_ != o.kind_)
    throw std::invalid_argument("observables belong to different models");
}

Observable& Observable::operator+=(const Observable& o) {
  require_kind(o);
  for (const auto& [m, c] : o.smono_) add_sphere_term(m, c);
  for (const auto& [m, c] : o.tmono_) add_torus_term(m, c);
  return *this;
}

Observable& Observable::operator-=(const Observable& o) {
  require_kind(o);
  for (const auto& [m, c] : o.smono_) add_sphere_term(m, -c);
  for (const auto& [m, c] : o.tmono_) add_torus_term(m, -c);
  return *this;
}

Observable& Observable::operator*=(const Observable& o) {
  require_kind(o);
  Observable out(kind_);
  if (kind_ == ModelKind::Sphere) {
    for (const auto& [ma, ca] : smono_)
      for (const auto& [mb, cb] : o.smono_)
        out.add_sphere_term(SphereMono{ma.zp + mb.zp, ma.zbp + mb.zbp, ma.sp + mb.sp}, ca * cb);
  } else {
    for (const auto& [ma, ca] : tmono_)
      for (const auto& [mb, cb] : o.tmono_)
        out.add_torus_term(TorusMono{ma.a + mb.a, ma.b + mb.b}, ca * cb);
  }
  *this = std::move(out);
  return *this;
}

Observable& Observable::operator*=(Complex c) {
  if (c == Complex(0, 0)) {
    smono_.clear();
    tmono_.clear();
    return *this;
  }
  for (auto& [m, v] : smono_) v *= c;
  for (auto& [m, v] : tmono_) v *= c;
  return *this;
}

Complex Observable::value(const ChartPoint& p) const {
  if (p.kind != kind_) throw std::invalid_argument("chart point does not match observable");
  Complex acc(0, 0);
  if (kind_ == ModelKind::Sphere) {
    const double r = std::abs(p.z);
    const double theta = (r == 0.0) ? 0.0 : std::arg(p.z);
    const double log_r = (r == 0.0) ? 0.0 : std::log(r);
    const double log_1r2 = std::log1p(r * r);
    for (const auto& [m, c] : smono_) {
      if (r == 0.0) {
        if (m.zp + m.zbp == 0) acc += c;  // s(0) = 1
        continue;
      }
      const double mag = std::exp((m.zp + m.zbp) * log_r - m.sp * log_1r2);
      acc += c * std::polar(mag, (m.zp - m.zbp) * theta);
    }
  } else {
    for (const auto& [m, c] : tmono_) {
      const double phase = 2.0 * kPi * (m.a * p.u + m.b * p.v);
      acc += c * Complex(std::cos(phase), std::sin(phase));
    }
  }
  return acc;
}

bool Observable::is_real() const {
  double scale = 0.0;
  for (const auto& [m, c] : smono_) scale = std::max(scale, std::abs(c));
  for (const auto& [m, c] : tmono_) scale = std::max(scale, std::abs(c));
  if (scale == 0.0) return true;
  if (kind_ == ModelKind::Sphere) {
    for (const auto& [m, c] : smono_) {
      const SphereMono pm{m.zbp, m.zp, m.sp};
      auto it = smono_.find(pm);
      const Complex partner = (it == smono_.end()) ? Complex(0, 0) : it->second;
      if (!nearly_conjugate(partner, c, scale)) return false;
    }
  } else {
    for (const auto& [m, c] : tmono_) {
      const TorusMono pm{-m.a, -m.b};
      auto it = tmono_.find(pm);
      const Complex partner = (it == tmono_.end()) ? Complex(0, 0) : it->second;
      if (!nearly_conjugate(partner, c, scale)) return false;
    }
  }
  return true;
}

double Observable::real_value(const ChartPoint& p) const { return value(p).real(); }

int Observable::sphere_extra_degree() const {
  // The integrand of <b_j, f b_k> for a monomial z^a zbar^b s^c becomes, in
  // the t = r^2/(1+r^2) variable, a polynomial of degree <= m + (a+b)/2 with
  // angular modes bounded by m + |a-b|; one extra unit covers both.
  int deg = 0;
  for (const auto& [m, c] : smono_)
    deg = std::max(deg, (m.zp + m.zbp + 1) / 2 + 1);
  return deg;
}

int Observable::torus_max_frequency() const {
  int freq = 0;
  for (const auto& [m, c] : tmono_)
    freq = std::max({freq, std::abs(m.a), std::abs(m.b)});
  return freq;
}

Observable partial_z(const Observable& f, const KahlerModel& model) {
  if (f.kind() != model.kind())
    throw std::invalid_argument("observable does not match model");
  Observable out(f.kind_);
  if (f.kind_ == ModelKind::Sphere) {
    // d/dz z^a zbar^b s^c = a z^{a-1} zbar^b s^c - c z^a zbar^{b+1} s^{c+1}
    for (const auto& [m, c] : f.smono_) {
      if (m.zp > 0)
        out.add_sphere_term({m.zp - 1, m.zbp, m.sp}, c * double(m.zp));
      if (m.sp != 0)
        out.add_sphere_term({m.zp, m.zbp + 1, m.sp + 1}, -c * double(m.sp));
    }
  } else {
    for (const auto& [m, c] : f.tmono_)
      out.add_torus_term(m, c * torus_dz_factor(model, m.a, m.b));
  }
  return out;
}

Observable partial_zbar(const Observable& f, const KahlerModel& model) {
  if (f.kind() != model.kind())
    throw std::invalid_argument("observable does not match model");
  Observable out(f.kind_);
  if (f.kind_ == ModelKind::Sphere) {
    for (const auto& [m, c] : f.smono_) {
      if (m.zbp > 0)
        out.add_sphere_term({m.zp, m.zbp - 1, m.sp}, c * double(m.zbp));
      if (m.sp != 0)
        out.add_sphere_term({m.zp + 1, m.zbp, m.sp + 1}, -c * double(m.sp));
    }
  } else {
    for (const auto& [m, c] : f.tmono_)
      out.add_torus_term(m, c * torus_dzbar_factor(model, m.a, m.b));
  }
  return out;
}

Observable conj(const Observable& f) {
  Observable out(f.kind_);
  for (const auto& [m, c] : f.smono_)
    out.add_sphere_term({m.zbp, m.zp, m.sp}, std::conj(c));
  for (const auto& [m, c] : f.tmono_)
    out.add_torus_term({-m.a, -m.b}, std::conj(c));
  return out;
}

Observable Observable::times_s_power(int k) const {
  if (kind_ != ModelKind::Sphere)
    throw std::logic_error("times_s_power applies to sphere observables");
  Observable out(kind_);
  for (const auto& [m, c] : smono_)
    out.add_sphere_term({m.zp, m.zbp, m.sp + k}, c);
  return out;
}

std::string Observable::debug_string() const {
  std::ostringstream os;
  if (kind_ == ModelKind::Sphere) {
    for (const auto& [m, c] : smono_)
      os << "(" << c.real() << (c.imag() < 0 ? "-" : "+") << std::abs(c.imag())
         << "i) z^" << m.zp << " zb^" << m.zbp << " s^" << m.sp << "  ";
  } else {
    for (const auto& [m, c] : tmono_)
      os << "(" << c.real() << (c.imag() < 0 ? "-" : "+") << std::abs(c.imag())
         << "i) e(" << m.a << "," << m.b << ")  ";
  }
  return os.str();
}

Complex torus_dz_factor(const KahlerModel& model, int a, int b) {
  // phase = 2 pi (a u + b v) with u = x - y Re(tau)/Im(tau), v = y/Im(tau);
  // d(phase)/dx = 2 pi a, d(phase)/dy = 2 pi (b - a Re tau)/Im tau, and
  // d/dz e^{i phase} = (i/2)(phase_x - i phase_y) e^{i phase}.
  const double beta = (b - a * model.tau().real()) / model.im_tau();
  return Complex(0, kPi) * Complex(a, -beta);
}

Complex torus_dzbar_factor(const KahlerModel& model, int a, int b) {
  const double beta = (b - a * model.tau().real()) / model.im_tau();
  return Complex(0, kPi) * Complex(a, beta);
}

}  // namespace btq
