#include <doctest.h>

#include "btq/parser.hpp"
#include "util.hpp"

using namespace btq;
using namespace btq::test;

TEST_CASE("sphere atoms satisfy x1^2 + x2^2 + x3^2 = 1") {
  Observable s = Observable::x1() * Observable::x1() + Observable::x2() * Observable::x2() +
                 Observable::x3() * Observable::x3();
  // the canonical reduction collapses the sum to the constant monomial
  CHECK(s.term_count() == 1);
  std::mt19937_64 rng(1);
  for (const auto& p : random_points(KahlerModel::sphere(), rng, 40, 5.0))
    CHECK(std::abs(s.value(p) - Complex(1, 0)) <= 1e-14);
}

TEST_CASE("atom values match their chart definitions") {
  const Complex z(0.7, -0.4);
  const auto p = ChartPoint::sphere(z);
  const double d = 1.0 + std::norm(z);
  CHECK(std::abs(Observable::x1().value(p) - (z + std::conj(z)) / d) <= 1e-15);
  CHECK(std::abs(Observable::x2().value(p) - Complex(0, -1) * (z - std::conj(z)) / d) <= 1e-15);
  CHECK(std::abs(Observable::x3().value(p) - (1.0 - std::norm(z)) / d) <= 1e-15);

  const auto q = ChartPoint::torus(0.3, 0.8);
  CHECK(Observable::fourier_cos(2, 1).value(q).real() ==
        doctest::Approx(std::cos(2 * kPi * (2 * 0.3 + 0.8))).epsilon(1e-14));
  CHECK(Observable::fourier_sin(1, -1).value(q).real() ==
        doctest::Approx(std::sin(2 * kPi * (0.3 - 0.8))).epsilon(1e-14));
}

TEST_CASE("is_real tracks constructors exactly") {
  CHECK(Observable::x1().is_real());
  CHECK((Observable::x1() * Observable::x2()).is_real());
  CHECK(!(Complex(0, 1) * Observable::x1()).is_real());
  CHECK(!(Observable::constant(ModelKind::Sphere, Complex(0, 2))).is_real());
  CHECK((Observable::fourier_cos(1, 2) * Observable::fourier_sin(3, -1)).is_real());
  std::mt19937_64 rng(2);
  for (int i = 0; i < 10; ++i) {
    CHECK(random_atom_poly(ModelKind::Sphere, rng).is_real());
    CHECK(random_atom_poly(ModelKind::Torus, rng).is_real());
  }
}

TEST_CASE("conjugation") {
  std::mt19937_64 rng(3);
  Observable f = random_atom_poly(ModelKind::Sphere, rng) +
                 Complex(0, 0.3) * random_atom_poly(ModelKind::Sphere, rng);
  for (const auto& p : random_points(KahlerModel::sphere(), rng, 10))
    CHECK(std::abs(conj(f).value(p) - std::conj(f.value(p))) <= 1e-14);
}

TEST_CASE("symbolic derivatives agree with central differences") {
  for (auto model : {KahlerModel::sphere(), KahlerModel::torus(Complex(0.3, 1.2))}) {
    std::mt19937_64 rng(4);
    std::vector<Observable> cases;
    if (model.is_sphere())
      cases = {Observable::x1(), Observable::x2(), Observable::x3()};
    else
      cases = {Observable::fourier_cos(1, 0), Observable::fourier_sin(0, 1),
               Observable::fourier_cos(2, -1)};
    for (int i = 0; i < 30; ++i) cases.push_back(random_atom_poly(model.kind(), rng));

    for (const auto& f : cases) {
      const Observable fz = partial_z(f, model);
      const Observable fzb = partial_zbar(f, model);
      for (const auto& p : random_points(model, rng, 4, 1.5)) {
        const double scale = 1.0 + std::abs(fz.value(p));
        CHECK(std::abs(fz.value(p) - fd_partial_z(model, f, p)) <= 1e-6 * scale);
        CHECK(std::abs(fzb.value(p) - fd_partial_zbar(model, f, p)) <= 1e-6 * scale);
      }
    }
  }
}

TEST_CASE("reduction keeps atom polynomials bounded on the whole chart") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 5; ++i) {
    Observable f = random_atom_poly(ModelKind::Sphere, rng);
    const auto far = ChartPoint::sphere(std::polar(3.0e6, 1.234));
    const Complex v = f.value(far);
    CHECK(std::isfinite(v.real()));
    CHECK(std::abs(v) < 50.0);
  }
}

TEST_CASE("times_s_power composes to identity") {
  std::mt19937_64 rng(6);
  Observable f = random_atom_poly(ModelKind::Sphere, rng);
  Observable g = f.times_s_power(-2).times_s_power(2);
  for (const auto& p : random_points(KahlerModel::sphere(), rng, 10))
    CHECK(std::abs(f.value(p) - g.value(p)) <= 1e-12 * (1.0 + std::abs(f.value(p))));
}

TEST_CASE("expression parser") {
  SUBCASE("value round-trip against hand-built trees") {
    const Observable parsed = parse_observable("x3 * (x1 + 2) - 0.5*x2", ModelKind::Sphere);
    const Observable built =
        Observable::x3() * (Observable::x1() + Observable::constant(ModelKind::Sphere, 2.0)) -
        0.5 * Observable::x2();
    std::mt19937_64 rng(7);
    for (const auto& p : random_points(KahlerModel::sphere(), rng, 20))
      CHECK(std::abs(parsed.value(p) - built.value(p)) <= 1e-14);
  }
  SUBCASE("torus atoms") {
    const Observable parsed = parse_observable("c(1,0)*s(0,1) + 3", ModelKind::Torus);
    const Observable built = Observable::fourier_cos(1, 0) * Observable::fourier_sin(0, 1) +
                             Observable::constant(ModelKind::Torus, 3.0);
    std::mt19937_64 rng(8);
    for (const auto& p : random_points(KahlerModel::torus(Complex(0, 1)), rng, 20))
      CHECK(std::abs(parsed.value(p) - built.value(p)) <= 1e-14);
  }
  SUBCASE("unbalanced parenthesis reports a position") {
    try {
      parse_observable("x3 * (x1 + 2", ModelKind::Sphere);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.position() == 12);
    }
  }
  SUBCASE("unknown identifier") {
    CHECK_THROWS_AS(parse_observable("x4 + 1", ModelKind::Sphere), ParseError);
    CHECK_THROWS_AS(parse_observable("c(1,0)", ModelKind::Sphere), ParseError);
    CHECK_THROWS_AS(parse_observable("x1", ModelKind::Torus), ParseError);
  }
  SUBCASE("numbers and unary minus") {
    const Observable f = parse_observable("-2.5e-1 * x1 - -1", ModelKind::Sphere);
    const auto p = ChartPoint::sphere(Complex(1, 0));
    CHECK(f.value(p).real() == doctest::Approx(-0.25 * 1.0 + 1.0).epsilon(1e-14));
  }
}

TEST_CASE("mixed-model operations are rejected") {
  CHECK_THROWS_AS(Observable::x1() + Observable::fourier_cos(1, 0), std::invalid_argument);
  CHECK_THROWS_AS(Observable::x1().value(ChartPoint::torus(0.1, 0.2)), std::invalid_argument);
}
