#include "btq/toeplitz.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "btq/format.hpp"
#include "btq/parallel.hpp"

namespace btq {

namespace {

constexpr Eigen::Index kBlock = 256;
constexpr double kConditionLimit = 1e8;

void require_real(const Observable& f, const char* who) {
  if (!f.is_real()) throw std::invalid_argument(std::string(who) + " requires a real observable");
}

void require_level(const ToeplitzContext& ctx, const OperatorMatrix& a, const char* who) {
  if (a.level != ctx.level())
    throw std::invalid_argument(std::string(who) + ": operator level does not match context");
}

void check_finite(const Matrix& m, const char* who) {
  if (!m.allFinite()) throw std::runtime_error(std::string(who) + ": non-finite matrix entries");
}

}  // namespace

Matrix weighted_sandwich(const Matrix& u, const Vector& c) {
  const Eigen::Index n = u.rows(), d = u.cols();
  Matrix sum = Matrix::Zero(d, d);
  Matrix carry = Matrix::Zero(d, d);
  for (Eigen::Index start = 0; start < n; start += kBlock) {
    const Eigen::Index len = std::min(kBlock, n - start);
    const Matrix contrib = u.middleRows(start, len).adjoint() *
                           (c.segment(start, len).asDiagonal() * u.middleRows(start, len));
    const Matrix y = contrib - carry;
    const Matrix t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

Matrix weighted_pairing(const Matrix& u, const Eigen::VectorXd& w, const Matrix& p) {
  const Eigen::Index n = u.rows(), d = u.cols();
  Matrix sum = Matrix::Zero(d, p.cols());
  Matrix carry = Matrix::Zero(d, p.cols());
  for (Eigen::Index start = 0; start < n; start += kBlock) {
    const Eigen::Index len = std::min(kBlock, n - start);
    const Matrix contrib = u.middleRows(start, len).adjoint() *
                           (w.segment(start, len).asDiagonal() * p.middleRows(start, len));
    const Matrix y = contrib - carry;
    const Matrix t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

ToeplitzContext::ToeplitzContext(const KahlerModel& model, SectionBasis basis, QuadratureRule rule)
    : model_(model), basis_(std::move(basis)), rule_(std::move(rule)) {
  if (basis_.model().kind() != model_.kind() || rule_.kind != model_.kind())
    throw std::invalid_argument("context pieces belong to different models");

  const Eigen::Index n = static_cast<Eigen::Index>(rule_.nodes.size());
  const Eigen::Index d = basis_.dim();
  if (n < d)
    throw std::runtime_error("quadrature under-resolved: fewer nodes than sections");

  weights_ = Eigen::Map<const Eigen::VectorXd>(rule_.weights.data(), n);

  Matrix b(n, d), bd(n, d);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t lo, std::size_t hi) {
    std::vector<Complex> vals(d), ders(d);
    for (std::size_t i = lo; i < hi; ++i) {
      basis_.eval_all_weighted(rule_.nodes[i], vals, ders);
      for (Eigen::Index k = 0; k < d; ++k) {
        b(i, k) = vals[k];
        bd(i, k) = ders[k];
      }
    }
  });

  gram_ = weighted_sandwich(b, weights_.cast<Complex>());
  check_finite(gram_, "gram");
  const double herm = (gram_ - gram_.adjoint()).cwiseAbs().maxCoeff();
  const double scale = gram_.cwiseAbs().maxCoeff();
  if (herm > 1e-13 * std::max(1.0, scale))
    throw std::runtime_error("gram matrix lost hermiticity; quadrature under-resolved");
  gram_ = 0.5 * (gram_ + gram_.adjoint().eval());

  Eigen::VectorXd diag = gram_.diagonal().real();
  if ((diag.array() <= 0.0).any())
    throw std::runtime_error("gram matrix has non-positive diagonal; quadrature under-resolved");
  const Eigen::VectorXd inv_sqrt = diag.array().rsqrt();

  Matrix gram_eq = inv_sqrt.asDiagonal() * gram_ * inv_sqrt.asDiagonal();
  gram_eq = 0.5 * (gram_eq + gram_eq.adjoint().eval());

  Eigen::SelfAdjointEigenSolver<Matrix> es(gram_eq, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo <= 0.0)
    throw std::runtime_error("gram matrix not positive definite (min eigenvalue " +
                             format_double(lo) + "); quadrature under-resolved");
  condition_ = hi / lo;
  if (condition_ > kConditionLimit)
    throw std::runtime_error("gram condition number " + format_double(condition_) +
                             " exceeds 1e8; raise the quadrature resolution");

  Eigen::LLT<Matrix> llt(gram_eq);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("gram factorization failed; quadrature under-resolved");

  // u = b D^{-1/2} L^{-*}; store the combined transform for off-node rows.
  Matrix inv_u = llt.matrixU().solve(Matrix::Identity(d, d));
  transform_ = inv_sqrt.asDiagonal() * inv_u;
  ortho_values_ = b * transform_;
  ortho_derivatives_ = bd * transform_;

  const Matrix identity_check = weighted_sandwich(ortho_values_, weights_.cast<Complex>());
  const double ortho_err = (identity_check - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
  if (ortho_err > 1e-11)
    throw std::runtime_error("orthonormality residual " + format_double(ortho_err) +
                             " above 1e-11; quadrature under-resolved");

  density_scale_ = ortho_values_.cwiseAbs2().rowwise().sum().maxCoeff();
}

Vector ToeplitzContext::coherent_row(const ChartPoint& p) const {
  const Eigen::Index d = dim();
  std::vector<Complex> vals(d), ders(d);
  basis_.eval_all_weighted(p, vals, ders);
  Eigen::Map<const Vector> row(vals.data(), d);
  return transform_.transpose() * row;
}

Vector ToeplitzContext::observable_node_values(const Observable& f) const {
  const Eigen::Index n = static_cast<Eigen::Index>(rule_.nodes.size());
  Vector out(n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) out(i) = f.value(rule_.nodes[i]);
  });
  return out;
}

ToeplitzContext build_context(const KahlerModel& model, const SectionBasis& basis,
                              const QuadratureRule& rule) {
  return ToeplitzContext(model, basis, rule);
}

ToeplitzContext build_context(const KahlerModel& model, int m, int extra_degree, int torus_grid) {
  SectionBasis basis(model, m);
  QuadratureRule rule = model.is_sphere()
                            ? sphere_rule(m, extra_degree)
                            : torus_rule(model, torus_grid > 0
                                                    ? torus_grid
                                                    : default_torus_grid(m, std::max(4, extra_degree)));
  return ToeplitzContext(model, std::move(basis), std::move(rule));
}

OperatorMatrix toeplitz_matrix(const ToeplitzContext& ctx, const Observable& f) {
  return toeplitz_matrix(ctx, ctx.observable_node_values(f));
}

OperatorMatrix toeplitz_matrix(const ToeplitzContext& ctx, const Vector& node_values) {
  if (node_values.size() != static_cast<Eigen::Index>(ctx.rule().nodes.size()))
    throw std::invalid_argument("toeplitz_matrix: node value length mismatch");
  OperatorMatrix out;
  out.level = ctx.level();
  out.mat = weighted_sandwich(ctx.orthonormal_values(),
                              node_values.cwiseProduct(ctx.weights().cast<Complex>()));
  check_finite(out.mat, "toeplitz_matrix");
  return out;
}

double operator_norm(const Matrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("operator_norm: square matrix expected");
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  if ((a - a.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * scale) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

double operator_norm(const OperatorMatrix& a) { return operator_norm(a.mat); }

double commutator_residual(const ToeplitzContext& ctx, const Observable& f, const Observable& g) {
  require_real(f, "commutator_residual");
  require_real(g, "commutator_residual");
  Matrix tf = toeplitz_matrix(ctx, f).mat;
  Matrix tg = toeplitz_matrix(ctx, g).mat;
  tf = 0.5 * (tf + tf.adjoint().eval());
  tg = 0.5 * (tg + tg.adjoint().eval());
  const Matrix prod = tf * tg;  // [tf,tg] = prod - prod^* for Hermitian factors
  const Matrix comm = prod - prod.adjoint();
  const Matrix tb = toeplitz_matrix(ctx, poisson_bracket(ctx.model(), f, g)).mat;
  const double m = static_cast<double>(ctx.level());
  return operator_norm((Complex(0, m) * comm - tb).eval());
}

OperatorMatrix prequantum_matrix(const ToeplitzContext& ctx, const Observable& f) {
  require_real(f, "prequantum_matrix");
  const KahlerModel& model = ctx.model();
  // Hamiltonian field of the level-m symplectic form m*omega: X^(m) = X/m.
  // The level-m bundle has curvature -i m omega, so this is the field the
  // prequantum formula pairs with its connection.
  const double inv_m = 1.0 / static_cast<double>(ctx.level());
  Observable dbar_f = partial_zbar(f, model);
  Observable xz = model.is_sphere()
                      ? Complex(0, -inv_m) * dbar_f.times_s_power(-2)
                      : Complex(0, -inv_m * model.im_tau() / kPi) * dbar_f;

  const Vector xz_vals = ctx.observable_node_values(xz);
  const Vector f_vals = ctx.observable_node_values(f);

  const Eigen::Index n = xz_vals.size();
  Vector pot(n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      pot(i) = ctx.basis().connection_potential(ctx.rule().nodes[i]);
  });

  // (P_f u)(node) = -X^z (u' + m a1 u) + i f u, columns already orthonormal.
  const Matrix& u = ctx.orthonormal_values();
  const Matrix& du = ctx.orthonormal_derivatives();
  Matrix action = (-xz_vals).asDiagonal() * (du + Matrix(pot.asDiagonal() * u)) +
                  Matrix((Complex(0, 1) * f_vals).asDiagonal() * u);

  OperatorMatrix out;
  out.level = ctx.level();
  out.mat = weighted_pairing(u, ctx.weights(), action);
  check_finite(out.mat, "prequantum_matrix");
  return out;
}

double tuynman_residual(const ToeplitzContext& ctx, const Observable& f, double kappa) {
  require_real(f, "tuynman_residual");
  const double m = static_cast<double>(ctx.level());
  const Observable corrected = f - (1.0 / (2.0 * m)) * laplacian(ctx.model(), f, kappa);
  const Matrix q = prequantum_matrix(ctx, f).mat;
  const Matrix t = toeplitz_matrix(ctx, corrected).mat;
  return operator_norm((q - Complex(0, 1) * t).eval());
}

SymbolField epsilon_function(const ToeplitzContext& ctx) {
  const Matrix& u = ctx.orthonormal_values();
  SymbolField field;
  field.values.resize(u.rows());
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    field.values[i] = Complex(u.row(i).squaredNorm(), 0.0);
  return field;
}

SymbolField covariant_symbol(const ToeplitzContext& ctx, const OperatorMatrix& a) {
  require_level(ctx, a, "covariant_symbol");
  const Matrix& u = ctx.orthonormal_values();
  const Matrix ua = u * a.mat;
  // A base point of the linear system (torus at m = 1) makes the density
  // vanish; a relative threshold detects it through the roundoff haze.
  const double density_floor = 1e-30 * ctx.density_scale();
  SymbolField field;
  field.values.resize(u.rows());
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    const double den = u.row(i).squaredNorm();
    if (!(den > density_floor))
      throw std::runtime_error("covariant_symbol: vanishing Bergman density at a node");
    field.values[i] = (ua.row(i) * u.row(i).adjoint())(0, 0) / den;
  }
  return field;
}

Complex covariant_symbol_at(const ToeplitzContext& ctx, const OperatorMatrix& a,
                            const ChartPoint& p) {
  require_level(ctx, a, "covariant_symbol_at");
  const Vector v = ctx.coherent_row(p);
  const double den = v.squaredNorm();
  if (!(den > 1e-30 * ctx.density_scale()))
    throw std::runtime_error("covariant_symbol_at: vanishing Bergman density");
  return (v.transpose() * a.mat * v.conjugate())(0, 0) / den;
}

double hs_adjointness_residual(const ToeplitzContext& ctx, const Observable& f,
                               const OperatorMatrix& a) {
  require_level(ctx, a, "hs_adjointness_residual");
  const Matrix tf = toeplitz_matrix(ctx, f).mat;
  const Complex lhs = (tf.adjoint() * a.mat).trace();

  const Matrix& u = ctx.orthonormal_values();
  const Matrix ua = u * a.mat;
  const Vector f_vals = ctx.observable_node_values(f);
  std::vector<Complex> integrand(u.rows());
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    const Complex sigma_eps = (ua.row(i) * u.row(i).adjoint())(0, 0);
    integrand[i] = std::conj(f_vals(i)) * sigma_eps;
  }
  const Complex rhs = integrate(ctx.rule(), integrand);
  return std::abs(lhs - rhs);
}

void write_matrix_text(std::ostream& os, const OperatorMatrix& a, ModelKind kind) {
  const Eigen::Index d = a.mat.rows();
  if (a.mat.cols() != d) throw std::invalid_argument("write_matrix_text: square matrix expected");
  os << "btq-matrix v1 d=" << d << " m=" << a.level << " model=" << model_name(kind) << "\n";
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c)
      os << r << " " << c << " " << format_double(a.mat(r, c).real()) << " "
         << format_double(a.mat(r, c).imag()) << "\n";
}

OperatorMatrix read_matrix_text(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw std::runtime_error("matrix text: missing header");
  int d = 0, m = 0;
  char model_buf[16] = {0};
  if (std::sscanf(header.c_str(), "btq-matrix v1 d=%d m=%d model=%15s", &d, &m, model_buf) != 3 ||
      d <= 0)
    throw std::runtime_error("matrix text: malformed header '" + header + "'");
  OperatorMatrix out;
  out.level = m;
  out.mat = Matrix::Zero(d, d);
  for (int i = 0; i < d * d; ++i) {
    int r = 0, c = 0;
    double re = 0, im = 0;
    if (!(is >> r >> c >> re >> im) || r < 0 || r >= d || c < 0 || c >= d)
      throw std::runtime_error("matrix text: malformed entry line");
    out.mat(r, c) = Complex(re, im);
  }
  return out;
}

}  // namespace btq
