#include <doctest.h>

#include <sstream>

#include "btq/random.hpp"
#include "btq/toeplitz.hpp"
#include "util.hpp"

using namespace btq;
using namespace btq::test;

namespace {

// Independent dense path: different quadrature resolution, plain-loop Gram,
// orthonormalization through an eigen-decomposition (G^{-1/2}) instead of the
// triangular factor.
double commutator_residual_oracle(const KahlerModel& model, int m, const Observable& f,
                                  const Observable& g) {
  const SectionBasis basis(model, m);
  const QuadratureRule rule = model.is_sphere() ? sphere_rule(m, 13)
                                                : torus_rule(model, default_torus_grid(m, 6) + 11);
  const int d = basis.dim();
  const int n = static_cast<int>(rule.size());

  Eigen::MatrixXcd b(n, d), bd(n, d);
  std::vector<Complex> vals(d), ders(d);
  for (int i = 0; i < n; ++i) {
    basis.eval_all_weighted(rule.nodes[i], vals, ders);
    for (int k = 0; k < d; ++k) {
      b(i, k) = vals[k];
      bd(i, k) = ders[k];
    }
  }

  Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) {
      Complex acc(0, 0);
      for (int i = 0; i < n; ++i) acc += std::conj(b(i, r)) * rule.weights[i] * b(i, c);
      gram(r, c) = acc;
    }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
  Eigen::MatrixXcd inv_sqrt = es.eigenvectors() *
                              es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                              es.eigenvectors().adjoint();
  Eigen::MatrixXcd u = b * inv_sqrt;

  auto assemble = [&](const Observable& h) {
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) {
        Complex acc(0, 0);
        for (int i = 0; i < n; ++i)
          acc += std::conj(u(i, r)) * h.value(rule.nodes[i]) * rule.weights[i] * u(i, c);
        t(r, c) = acc;
      }
    return t;
  };

  const Eigen::MatrixXcd tf = assemble(f);
  const Eigen::MatrixXcd tg = assemble(g);
  const Eigen::MatrixXcd tb = assemble(poisson_bracket(model, f, g));
  const Eigen::MatrixXcd res =
      Complex(0, double(m)) * (tf * tg - tg * tf) - tb;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(res);
  return svd.singularValues()(0);
}

}  // namespace

TEST_CASE("context construction") {
  const auto sph = KahlerModel::sphere();

  SUBCASE("sphere m=1 Gram is diag(pi, pi)") {
    const auto ctx = build_context(sph, 1);
    CHECK(ctx.gram()(0, 0).real() == doctest::Approx(kPi).epsilon(1e-12));
    CHECK(ctx.gram()(1, 1).real() == doctest::Approx(kPi).epsilon(1e-12));
    CHECK(std::abs(ctx.gram()(0, 1)) <= 1e-13);
    CHECK(ctx.gram_condition() < 1.0 + 1e-10);
  }

  SUBCASE("sphere Gram diagonals follow the Beta closed form") {
    for (int m : {4, 16}) {
      const auto ctx = build_context(sph, m);
      for (int k = 0; k <= m; ++k)
        CHECK(ctx.gram()(k, k).real() ==
              doctest::Approx(beta_gram_oracle(m, k)).epsilon(1e-12));
      for (int j = 0; j <= m; ++j)
        for (int k = 0; k < j; ++k) CHECK(std::abs(ctx.gram()(j, k)) <= 1e-13);
    }
  }

  SUBCASE("torus Gram is a known multiple of the identity") {
    const auto tor = KahlerModel::torus(Complex(0, 1));
    for (int m : {2, 5}) {
      const auto ctx = build_context(tor, m);
      const double expected = 2.0 * kPi / std::sqrt(2.0 * m * tor.im_tau());
      for (int k = 0; k < m; ++k)
        CHECK(ctx.gram()(k, k).real() == doctest::Approx(expected).epsilon(1e-11));
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < j; ++k) CHECK(std::abs(ctx.gram()(j, k)) <= 1e-11);
    }
  }

  SUBCASE("orthonormality of the transformed node values") {
    for (int m : {3, 12}) {
      const auto ctx = build_context(sph, m);
      const Matrix check = weighted_sandwich(ctx.orthonormal_values(),
                                             ctx.weights().cast<Complex>());
      CHECK((check - Matrix::Identity(ctx.dim(), ctx.dim())).cwiseAbs().maxCoeff() <= 1e-11);
    }
  }

  SUBCASE("under-resolved quadrature aborts") {
    // fewer nodes than sections cannot produce a positive-definite Gram
    SectionBasis basis(sph, 24);
    QuadratureRule rule = sphere_rule(2, 0);
    rule.level = 24;
    CHECK_THROWS_AS(ToeplitzContext(sph, std::move(basis), std::move(rule)),
                    std::runtime_error);
  }
}

TEST_CASE("toeplitz matrices") {
  const auto sph = KahlerModel::sphere();
  std::mt19937_64 rng(41);

  SUBCASE("T_1 is the identity") {
    for (int m : {2, 9}) {
      const auto ctx = build_context(sph, m);
      const auto t = toeplitz_matrix(ctx, Observable::constant(ModelKind::Sphere, 1.0));
      CHECK((t.mat - Matrix::Identity(m + 1, m + 1)).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }

  SUBCASE("T_{x3} is diagonal with entries (m-2k)/(m+2)") {
    for (int m : {4, 16}) {
      const auto ctx = build_context(sph, m);
      const auto t = toeplitz_matrix(ctx, Observable::x3());
      Matrix expected = Matrix::Zero(m + 1, m + 1);
      for (int k = 0; k <= m; ++k) expected(k, k) = (m - 2.0 * k) / (m + 2.0);
      CHECK((t.mat - expected).cwiseAbs().maxCoeff() <= 1e-11);
    }
  }

  SUBCASE("linearity and star-compatibility") {
    const auto ctx = build_context(sph, 6);
    const Observable f = random_atom_poly(ModelKind::Sphere, rng);
    const Observable g = random_atom_poly(ModelKind::Sphere, rng);
    const Complex a(0.7, 0), b(-1.3, 0);
    const Matrix lhs = toeplitz_matrix(ctx, a * f + b * g).mat;
    const Matrix rhs = a * toeplitz_matrix(ctx, f).mat + b * toeplitz_matrix(ctx, g).mat;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);

    const Observable fc = f + Complex(0, 0.4) * g;
    const Matrix tf = toeplitz_matrix(ctx, fc).mat;
    const Matrix tfbar = toeplitz_matrix(ctx, conj(fc)).mat;
    CHECK((tf.adjoint() - tfbar).cwiseAbs().maxCoeff() <= 1e-12);
  }

  SUBCASE("assembly is idempotent under re-projection") {
    const auto ctx = build_context(sph, 5);
    const Observable f = random_atom_poly(ModelKind::Sphere, rng);
    const Matrix t = toeplitz_matrix(ctx, f).mat;
    const Matrix gram_id = weighted_sandwich(ctx.orthonormal_values(),
                                             ctx.weights().cast<Complex>());
    CHECK((gram_id * t * gram_id - t).cwiseAbs().maxCoeff() <= 1e-12);
    const Matrix t2 = toeplitz_matrix(ctx, f).mat;
    CHECK((t - t2).cwiseAbs().maxCoeff() == 0.0);  // deterministic
  }

  SUBCASE("hermiticity for real observables") {
    for (int m : {4, 8, 16}) {
      const auto ctx = build_context(sph, m);
      for (int i = 0; i < 30; ++i) {
        const Observable f = random_atom_poly(ModelKind::Sphere, rng);
        const Matrix t = toeplitz_matrix(ctx, f).mat;
        CHECK((t - t.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);
      }
    }
  }

  SUBCASE("positivity") {
    const auto ctx = build_context(sph, 10);
    const Observable f = Observable::x1() * Observable::x1() +
                         Observable::constant(ModelKind::Sphere, 0.1);
    const Matrix t = toeplitz_matrix(ctx, f).mat;
    Eigen::SelfAdjointEigenSolver<Matrix> es(t, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("operator norm") {
  const auto sph = KahlerModel::sphere();
  std::mt19937_64 rng(42);

  CHECK(operator_norm(Matrix::Identity(7, 7)) == doctest::Approx(1.0).epsilon(1e-14));

  for (int m : {4, 16}) {
    const auto ctx = build_context(sph, m);
    CHECK(operator_norm(toeplitz_matrix(ctx, Observable::x3())) ==
          doctest::Approx(double(m) / (m + 2)).epsilon(1e-11));
  }

  SUBCASE("contraction against the sup norm") {
    const std::vector<int> levels{4, 16, 64};
    for (int m : levels) {
      const auto ctx = build_context(sph, m);
      std::vector<ChartPoint> grid = refinement_grid(sph, 256);
      grid.insert(grid.end(), ctx.rule().nodes.begin(), ctx.rule().nodes.end());
      for (int i = 0; i < 20; ++i) {
        const Observable f = random_atom_poly(ModelKind::Sphere, rng);
        CHECK(operator_norm(toeplitz_matrix(ctx, f)) <= sup_norm(sph, f, grid) + 1e-10);
      }
    }
  }
}

TEST_CASE("commutator residual") {
  const auto sph = KahlerModel::sphere();

  SUBCASE("central constants") {
    const auto ctx = build_context(sph, 6);
    const Observable g = Observable::constant(ModelKind::Sphere, 2.5);
    CHECK(commutator_residual(ctx, Observable::x1(), g) <= 1e-12);
  }

  SUBCASE("closed form 4m/(m+2)^2 for coordinate pairs") {
    for (int m : {8, 64}) {
      const auto ctx = build_context(sph, m);
      const double expected = 4.0 * m / ((m + 2.0) * (m + 2.0));
      CHECK(commutator_residual(ctx, Observable::x3(), Observable::x1()) ==
            doctest::Approx(expected).epsilon(1e-9));
    }
  }

  SUBCASE("duplicate-path oracle at m=8") {
    const double main_path = commutator_residual(build_context(sph, 8),
                                                 Observable::x3(), Observable::x1());
    const double oracle = commutator_residual_oracle(sph, 8, Observable::x3(), Observable::x1());
    CHECK(main_path == doctest::Approx(oracle).epsilon(1e-10));
  }

  SUBCASE("decay factor between m=8 and m=64 is consistent with 1/m") {
    const double r8 = commutator_residual(build_context(sph, 8), Observable::x3(),
                                          Observable::x1());
    const double r64 = commutator_residual(build_context(sph, 64), Observable::x3(),
                                           Observable::x1());
    CHECK(r8 / r64 >= 4.0);
    CHECK(r8 / r64 <= 16.0);
  }
}

TEST_CASE("prequantum operator and the tuynman identity") {
  const auto sph = KahlerModel::sphere();
  std::mt19937_64 rng(43);

  SUBCASE("f = 1 maps to i * identity") {
    const auto ctx = build_context(sph, 7);
    const auto q = prequantum_matrix(ctx, Observable::constant(ModelKind::Sphere, 1.0));
    CHECK((q.mat - Complex(0, 1) * Matrix::Identity(8, 8)).cwiseAbs().maxCoeff() <= 1e-11);
  }

  SUBCASE("i^{-1} Q is hermitian for real f") {
    const auto ctx = build_context(sph, 9);
    for (int i = 0; i < 5; ++i) {
      const Observable f = random_atom_poly(ModelKind::Sphere, rng);
      const Matrix h = (prequantum_matrix(ctx, f).mat / Complex(0, 1)).eval();
      CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }

  SUBCASE("tuynman residual vanishes at the calibrated kappa") {
    const Observable f = Observable::constant(ModelKind::Sphere, 4.0);
    CHECK(tuynman_residual(build_context(sph, 5), f) <= 1e-12);

    for (int m : {5, 10, 20, 40})
      CHECK(tuynman_residual(build_context(sph, m), Observable::x3()) <= 1e-8);

    const auto tor = KahlerModel::torus(Complex(0, 1));
    for (int m : {5, 10, 20})
      CHECK(tuynman_residual(build_context(tor, m), Observable::fourier_cos(1, 0)) <= 1e-7);
  }

  SUBCASE("wrong kappa candidates are separated") {
    const auto ctx = build_context(sph, 10);
    CHECK(tuynman_residual(ctx, Observable::x3(), 2.0) <= 1e-8);
    for (double kappa : {1.0, -1.0, -2.0, 4.0, -4.0})
      CHECK(tuynman_residual(ctx, Observable::x3(), kappa) >= 1e-2);
  }
}

TEST_CASE("bergman density and covariant symbols") {
  const auto sph = KahlerModel::sphere();
  std::mt19937_64 rng(44);

  SUBCASE("epsilon integrates to the dimension and is constant on the sphere") {
    for (int m : {4, 16}) {
      const auto ctx = build_context(sph, m);
      const SymbolField eps = epsilon_function(ctx);
      CHECK(std::abs(integrate(ctx.rule(), eps.values).real() - ctx.dim()) <= 1e-10);
      const double expected = (m + 1) / (2.0 * kPi);
      for (const auto& e : eps.values)
        CHECK(std::abs(e.real() - expected) <= 1e-10);
    }
    const auto tor = KahlerModel::torus(Complex(0, 1));
    const auto ctx = build_context(tor, 6);
    const SymbolField eps = epsilon_function(ctx);
    CHECK(std::abs(integrate(ctx.rule(), eps.values).real() - 6.0) <= 1e-10);
  }

  SUBCASE("symbol of the identity is 1; conjugation symmetry") {
    const auto ctx = build_context(sph, 8);
    OperatorMatrix id{Matrix::Identity(9, 9), 8};
    for (const auto& s : covariant_symbol(ctx, id).values)
      CHECK(std::abs(s - Complex(1, 0)) <= 1e-12);

    OperatorMatrix a{random_hermitian(rng, 9), 8};
    a.mat += Complex(0, 0.3) * random_hermitian(rng, 9);  // make it non-hermitian
    OperatorMatrix astar{a.mat.adjoint(), 8};
    const auto sa = covariant_symbol(ctx, a);
    const auto sastar = covariant_symbol(ctx, astar);
    for (std::size_t i = 0; i < sa.values.size(); ++i)
      CHECK(std::abs(sastar.values[i] - std::conj(sa.values[i])) <= 1e-12);
  }

  SUBCASE("symbol of T_{x3} converges toward x3") {
    double prev_dev = -1.0;
    for (int m : {16, 64}) {
      const auto ctx = build_context(sph, m);
      const auto t = toeplitz_matrix(ctx, Observable::x3());
      const auto sym = covariant_symbol(ctx, t);
      double dev = 0.0, sup = 0.0;
      for (std::size_t i = 0; i < sym.values.size(); ++i) {
        CHECK(std::abs(sym.values[i].imag()) <= 1e-11);
        sup = std::max(sup, std::abs(sym.values[i]));
        dev = std::max(dev, std::abs(sym.values[i].real() -
                                     Observable::x3().value(ctx.rule().nodes[i]).real()));
      }
      CHECK(sup <= 1.0 + 1e-10);
      if (prev_dev > 0) CHECK(dev < prev_dev);
      prev_dev = dev;
    }
  }

  SUBCASE("off-node coherent rows agree with node evaluations") {
    const auto ctx = build_context(sph, 6);
    OperatorMatrix a{random_hermitian(rng, 7), 6};
    const auto field = covariant_symbol(ctx, a);
    for (std::size_t i = 0; i < 40; ++i) {
      const std::size_t node = (i * 37) % ctx.rule().size();
      const Complex via_point = covariant_symbol_at(ctx, a, ctx.rule().nodes[node]);
      CHECK(std::abs(via_point - field.values[node]) <= 1e-11);
    }
  }

  SUBCASE("the torus m=1 base point aborts the symbol map") {
    // the single level-1 theta section vanishes at (1/2, 1/2), which an even
    // grid hits exactly
    const auto tor = KahlerModel::torus(Complex(0, 1));
    const auto ctx = build_context(tor, 1, 8, 64);
    OperatorMatrix id{Matrix::Identity(1, 1), 1};
    CHECK_THROWS_AS(covariant_symbol(ctx, id), std::runtime_error);
    CHECK_THROWS_AS(covariant_symbol_at(ctx, id, ChartPoint::torus(0.5, 0.5)),
                    std::runtime_error);
  }
}

TEST_CASE("hilbert-schmidt adjointness") {
  std::mt19937_64 rng(45);
  const auto sph = KahlerModel::sphere();

  SUBCASE("f = 1 reduces to a trace identity") {
    const auto ctx = build_context(sph, 8);
    OperatorMatrix a{random_hermitian(rng, 9), 8};
    CHECK(hs_adjointness_residual(ctx, Observable::constant(ModelKind::Sphere, 1.0), a) <= 1e-11);
  }

  SUBCASE("sphere and torus residuals are pure roundoff") {
    const auto ctx = build_context(sph, 8);
    const auto t1 = toeplitz_matrix(ctx, Observable::x1());
    CHECK(hs_adjointness_residual(ctx, Observable::x3(), t1) <= 1e-10);

    const auto tor = KahlerModel::torus(Complex(0, 1));
    const auto tctx = build_context(tor, 6);
    OperatorMatrix a{random_hermitian(rng, 6), 6};
    CHECK(hs_adjointness_residual(tctx, Observable::fourier_cos(1, 1), a) <= 1e-9);
  }
}

TEST_CASE("doubling the quadrature changes nothing") {
  const auto sph = KahlerModel::sphere();
  const auto coarse = build_context(sph, 16, 8, 0);
  const auto fine = build_context(sph, 16, 42, 0);  // ~2.5x the radial and angular points
  const Observable f = Observable::x3() * Observable::x1();
  const Matrix tc = toeplitz_matrix(coarse, f).mat;
  const Matrix tf = toeplitz_matrix(fine, f).mat;
  CHECK((tc - tf).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((coarse.gram() - fine.gram()).cwiseAbs().maxCoeff() <= 1e-12);

  const auto tor = KahlerModel::torus(Complex(0, 1));
  const auto t1 = build_context(tor, 8, 8, 48);
  const auto t2 = build_context(tor, 8, 8, 96);
  const Observable g = Observable::fourier_cos(1, 0);
  CHECK((toeplitz_matrix(t1, g).mat - toeplitz_matrix(t2, g).mat).cwiseAbs().maxCoeff() <=
        1e-10);
}

TEST_CASE("matrix text format round-trips exactly") {
  std::mt19937_64 rng(46);
  OperatorMatrix a{random_hermitian(rng, 5), 4};
  a.mat(1, 3) = Complex(1.0 / 3.0, -2.0e-17);
  std::stringstream ss;
  write_matrix_text(ss, a, ModelKind::Sphere);
  const OperatorMatrix back = read_matrix_text(ss);
  CHECK(back.level == 4);
  CHECK(back.mat.rows() == 5);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c) {
      CHECK(back.mat(r, c).real() == a.mat(r, c).real());
      CHECK(back.mat(r, c).imag() == a.mat(r, c).imag());
    }
}
