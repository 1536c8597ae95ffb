#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <memory>
#include <vector>

#include "btq/geometry.hpp"
#include "btq/quadrature.hpp"
#include "btq/sections.hpp"

namespace btq {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Operator on the level-m space of holomorphic sections, expressed in the
// orthonormalized basis.
struct OperatorMatrix {
  Matrix mat;
  int level = 0;
};

// Per-node complex values of a covariant symbol, aligned with the rule nodes
// of the context that produced it.
struct SymbolField {
  std::vector<Complex> values;
};

// Discretization of the level-m quantization: Gram matrix of the raw basis
// under the L^2 pairing, its triangular orthonormalization, and the node
// evaluations of the orthonormal basis (all half-weighted, i.e. including
// h-hat^{m/2}).
//
// The Gram matrix is equilibrated by its diagonal before factorization; the
// raw monomial Gram on the sphere has diagonal entries spanning ~binom(m,m/2)
// which is pure basis scaling, removed exactly by the scaling.  The reported
// condition number is that of the equilibrated Gram, and construction aborts
// when it exceeds 1e8 or the factorization fails (under-resolved quadrature).
class ToeplitzContext {
 public:
  ToeplitzContext(const KahlerModel& model, SectionBasis basis, QuadratureRule rule);

  const KahlerModel& model() const { return model_; }
  const SectionBasis& basis() const { return basis_; }
  const QuadratureRule& rule() const { return rule_; }
  int dim() const { return static_cast<int>(gram_.rows()); }
  int level() const { return basis_.level(); }

  const Matrix& gram() const { return gram_; }
  double gram_condition() const { return condition_; }

  // Node evaluations U(n,k) = u_k(node n) * h^{m/2}(node n).
  const Matrix& orthonormal_values() const { return ortho_values_; }
  const Matrix& orthonormal_derivatives() const { return ortho_derivatives_; }
  const Eigen::VectorXd& weights() const { return weights_; }

  // Raw-basis-to-orthonormal transform R: [u_0..u_{d-1}] = [b_0..b_{d-1}] R.
  const Matrix& basis_transform() const { return transform_; }

  // Orthonormal row u(p) * h^{m/2}(p) at an arbitrary chart point.
  Vector coherent_row(const ChartPoint& p) const;

  Vector observable_node_values(const Observable& f) const;

  // Largest Bergman density over the nodes; reference scale for the
  // vanishing-density guard in the symbol maps.
  double density_scale() const { return density_scale_; }

 private:
  KahlerModel model_;
  SectionBasis basis_;
  QuadratureRule rule_;
  Eigen::VectorXd weights_;
  Matrix gram_;
  Matrix transform_;
  Matrix ortho_values_;
  Matrix ortho_derivatives_;
  double condition_ = 0.0;
  double density_scale_ = 0.0;
};

ToeplitzContext build_context(const KahlerModel& model, const SectionBasis& basis,
                              const QuadratureRule& rule);
// Convenience: basis + default rule for the level.
ToeplitzContext build_context(const KahlerModel& model, int m, int extra_degree = 8,
                              int torus_grid = 0);

// U^* diag(c) U accumulated over node blocks with Kahan compensation;
// deterministic for any thread count.
Matrix weighted_sandwich(const Matrix& u, const Vector& c);
Matrix weighted_pairing(const Matrix& u, const Eigen::VectorXd& w, const Matrix& p);

OperatorMatrix toeplitz_matrix(const ToeplitzContext& ctx, const Observable& f);
OperatorMatrix toeplitz_matrix(const ToeplitzContext& ctx, const Vector& node_values);

// Spectral norm; Hermitian inputs take the symmetric eigensolver path.
double operator_norm(const Matrix& a);
double operator_norm(const OperatorMatrix& a);

// || m i [T_f, T_g] - T_{{f,g}} ||
double commutator_residual(const ToeplitzContext& ctx, const Observable& f, const Observable& g);

// Matrix of Pi P_f on holomorphic sections, P_f = -nabla_{X_f} + i f id; the
// dzbar part of the connection annihilates holomorphic sections, so per node
// the action is -X^z (d_z b + m a1 b) + i f b.
OperatorMatrix prequantum_matrix(const ToeplitzContext& ctx, const Observable& f);

// || prequantum(f) - i T_{f - (1/2m) Delta f} ||
double tuynman_residual(const ToeplitzContext& ctx, const Observable& f,
                        double kappa = kLaplaceKappa);

// Bergman density sum_k |u_k|^2 h^m at the nodes.
SymbolField epsilon_function(const ToeplitzContext& ctx);

// Coherent-state expectation (v A v^*)/(v v^*) with v the orthonormal row.
SymbolField covariant_symbol(const ToeplitzContext& ctx, const OperatorMatrix& a);
Complex covariant_symbol_at(const ToeplitzContext& ctx, const OperatorMatrix& a,
                            const ChartPoint& p);

// | trace(T_f^* A) - \int conj(f) sigma(A) eps Omega |, an exact identity of
// the discretization; the residual is pure roundoff.
double hs_adjointness_residual(const ToeplitzContext& ctx, const Observable& f,
                               const OperatorMatrix& a);

// Text dump: header "btq-matrix v1 d=<d> m=<m> model=<sphere|torus>" followed
// by d^2 lines "row col re im" in row-major order, shortest round-trip
// decimals.
void write_matrix_text(std::ostream& os, const OperatorMatrix& a, ModelKind kind);
OperatorMatrix read_matrix_text(std::istream& is);

}  // namespace btq
