#include "btq/asymptotics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "btq/parser.hpp"
#include "btq/random.hpp"

namespace btq {

void ConvergenceSeries::push(int level, double v) {
  if (!m.empty() && level <= m.back())
    throw std::invalid_argument("series levels must be strictly increasing");
  if (!std::isfinite(v) || v < 0.0)
    throw std::invalid_argument("series values must be finite and nonnegative");
  m.push_back(level);
  value.push_back(v);
}

SlopeFit fit_slope(const ConvergenceSeries& series, int window_lo, int window_hi, double floor) {
  SlopeFit fit;
  fit.window_lo = window_lo;
  fit.window_hi = window_hi;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < series.m.size(); ++i) {
    if (series.m[i] < window_lo || series.m[i] > window_hi) continue;
    if (series.value[i] <= floor) {
      fit.degenerate = true;
      return fit;
    }
    xs.push_back(std::log(static_cast<double>(series.m[i])));
    ys.push_back(std::log(series.value[i]));
  }
  fit.points = static_cast<int>(xs.size());
  if (fit.points < 4)
    throw std::invalid_argument("too few points for slope fit (" + std::to_string(fit.points) +
                                " in window)");
  double xm = 0, ym = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xm += xs[i];
    ym += ys[i];
  }
  xm /= fit.points;
  ym /= fit.points;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - xm) * (xs[i] - xm);
    sxy += (xs[i] - xm) * (ys[i] - ym);
    syy += (ys[i] - ym) * (ys[i] - ym);
  }
  fit.slope = sxy / sxx;
  fit.intercept = ym - fit.slope * xm;
  double ss_res = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  fit.r2 = (syy == 0.0) ? 1.0 : 1.0 - ss_res / syy;
  return fit;
}

const char* experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::NormDeficit: return "norm-deficit";
    case ExperimentKind::Commutator: return "commutator";
    case ExperimentKind::Star1: return "star-1";
    case ExperimentKind::Star2: return "star-2";
    case ExperimentKind::Tuynman: return "tuynman";
    case ExperimentKind::Adjointness: return "adjointness";
  }
  return "unknown";
}

std::shared_ptr<const ToeplitzContext> ContextCache::get(const KahlerModel& model, int m,
                                                         int extra_degree, int torus_grid) {
  Key key{model.kind(), model.is_torus() ? model.tau().real() : 0.0,
          model.is_torus() ? model.tau().imag() : 0.0, m, extra_degree, torus_grid};
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  auto ctx = std::make_shared<const ToeplitzContext>(
      build_context(model, m, extra_degree, torus_grid));
  cache_.emplace(key, ctx);
  return ctx;
}

int required_extra_degree(ExperimentKind kind, const KahlerModel& model, const Observable& f,
                          const Observable* g, const SweepOptions& opt) {
  if (!model.is_sphere()) return opt.extra_degree;
  int need = f.sphere_extra_degree();
  if (g) need = std::max(need, g->sphere_extra_degree());
  switch (kind) {
    case ExperimentKind::Commutator:
      need = std::max(need, poisson_bracket(model, f, *g).sphere_extra_degree());
      break;
    case ExperimentKind::Star1:
    case ExperimentKind::Star2:
      need = std::max(need, (f * *g).sphere_extra_degree());
      break;
    case ExperimentKind::Tuynman: {
      need = std::max(need, laplacian(model, f, opt.kappa).sphere_extra_degree());
      const Observable xz = Complex(0, -1) * partial_zbar(f, model).times_s_power(-2);
      need = std::max(need, xz.sphere_extra_degree() + 1);
      break;
    }
    default:
      break;
  }
  return std::max(opt.extra_degree, need + 2);
}

int required_torus_grid(ExperimentKind kind, const KahlerModel& model, int m, const Observable& f,
                        const Observable* g, const SweepOptions& opt) {
  if (!model.is_torus()) return 0;
  if (opt.torus_grid > 0) return opt.torus_grid;
  (void)kind;
  int freq = f.torus_max_frequency();
  if (g) freq = std::max({freq, g->torus_max_frequency(), (f * *g).torus_max_frequency()});
  return default_torus_grid(m, std::max(4, freq));
}

C1Estimator::C1Estimator(std::shared_ptr<const ToeplitzContext> ctx, OperatorMatrix defect)
    : ctx_(std::move(ctx)), defect_(std::move(defect)) {}

Complex C1Estimator::value(const ChartPoint& p) const {
  return static_cast<double>(ctx_->level()) * covariant_symbol_at(*ctx_, defect_, p);
}

Vector C1Estimator::values_on(const QuadratureRule& rule) const {
  Vector out(rule.nodes.size());
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) out(i) = value(rule.nodes[i]);
  return out;
}

SymbolField C1Estimator::field() const {
  SymbolField f = covariant_symbol(*ctx_, defect_);
  const double scale = static_cast<double>(ctx_->level());
  for (auto& v : f.values) v *= scale;
  return f;
}

namespace {

std::shared_ptr<const ToeplitzContext> level_context(const KahlerModel& model, int m,
                                                     int extra, int grid, ContextCache* cache) {
  if (cache) return cache->get(model, m, extra, grid);
  return std::make_shared<const ToeplitzContext>(build_context(model, m, extra, grid));
}

OperatorMatrix star_defect(const ToeplitzContext& ctx, const Observable& f, const Observable& g) {
  const Matrix tf = toeplitz_matrix(ctx, f).mat;
  const Matrix tg = toeplitz_matrix(ctx, g).mat;
  const Matrix tfg = toeplitz_matrix(ctx, f * g).mat;
  OperatorMatrix out;
  out.level = ctx.level();
  out.mat = tf * tg - tfg;
  return out;
}

}  // namespace

C1Estimator estimate_c1(const KahlerModel& model, const Observable& f, const Observable& g,
                        int m_ref, const SweepOptions& opt, ContextCache* cache) {
  const int extra = required_extra_degree(ExperimentKind::Star2, model, f, &g, opt);
  const int grid = required_torus_grid(ExperimentKind::Star2, model, m_ref, f, &g, opt);
  auto ctx = level_context(model, m_ref, extra, grid, cache);
  return C1Estimator(ctx, star_defect(*ctx, f, g));
}

double c1_antisymmetry_residual(const KahlerModel& model, const Observable& f, const Observable& g,
                                int m_ref, const SweepOptions& opt, ContextCache* cache) {
  const int extra = required_extra_degree(ExperimentKind::Star2, model, f, &g, opt);
  const int grid = required_torus_grid(ExperimentKind::Star2, model, m_ref, f, &g, opt);
  auto ctx = level_context(model, m_ref, extra, grid, cache);

  const SymbolField fg = C1Estimator(ctx, star_defect(*ctx, f, g)).field();
  const SymbolField gf = C1Estimator(ctx, star_defect(*ctx, g, f)).field();
  const Vector bracket = ctx->observable_node_values(poisson_bracket(model, f, g));

  double worst = 0.0;
  for (std::size_t i = 0; i < fg.values.size(); ++i) {
    const Complex r = fg.values[i] - gf.values[i] + Complex(0, 1) * bracket(i);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

double star_truncation_residual(const ToeplitzContext& ctx, const Observable& f,
                                const Observable& g, int order, const C1Estimator* c1) {
  if (order != 1 && order != 2)
    throw std::invalid_argument("star_truncation_residual: order must be 1 or 2");
  OperatorMatrix defect = star_defect(ctx, f, g);
  if (order == 2) {
    if (!c1) throw std::invalid_argument("star_truncation_residual: order 2 needs a C1 estimate");
    const Vector c1_vals = c1->values_on(ctx.rule());
    defect.mat -= (1.0 / ctx.level()) * toeplitz_matrix(ctx, c1_vals).mat;
  }
  return operator_norm(defect);
}

ConvergenceSeries sweep(const KahlerModel& model, const Observable& f, const Observable* g,
                        ExperimentKind kind, const std::vector<int>& m_list,
                        const SweepOptions& opt, ContextCache* cache) {
  const bool needs_g =
      kind == ExperimentKind::Commutator || kind == ExperimentKind::Star1 ||
      kind == ExperimentKind::Star2;
  if (needs_g && !g) throw std::invalid_argument("sweep: experiment needs a second observable");
  for (std::size_t i = 1; i < m_list.size(); ++i)
    if (m_list[i] <= m_list[i - 1])
      throw std::invalid_argument("sweep: m-list must be strictly ascending");

  ConvergenceSeries series;
  series.experiment = experiment_name(kind);
  series.model = model_name(model.kind());

  std::optional<C1Estimator> c1;
  if (kind == ExperimentKind::Star2)
    c1.emplace(estimate_c1(model, f, *g, opt.m_ref, opt, cache));

  // One sup grid for the whole ladder, containing each level's actual
  // quadrature nodes: that makes ||T_f|| <= max_grid |f| an exact inequality.
  std::vector<ChartPoint> sup_grid;
  double sup_value = 0.0;
  if (kind == ExperimentKind::NormDeficit) {
    sup_grid = refinement_grid(model, opt.sup_refinement);
    for (int m : m_list) {
      try {
        const int extra = required_extra_degree(kind, model, f, g, opt);
        const int grid = required_torus_grid(kind, model, m, f, g, opt);
        auto ctx = level_context(model, m, extra, grid, cache);
        const auto& nodes = ctx->rule().nodes;
        sup_grid.insert(sup_grid.end(), nodes.begin(), nodes.end());
      } catch (const std::exception& e) {
        throw std::runtime_error("level m=" + std::to_string(m) + ": " + e.what());
      }
    }
    sup_value = sup_norm(model, f, sup_grid);
  }

  for (int m : m_list) {
    try {
      const int extra = required_extra_degree(kind, model, f, g, opt);
      const int grid = required_torus_grid(kind, model, m, f, g, opt);
      auto ctx = level_context(model, m, extra, grid, cache);
      series.quadrature = ctx->rule().exactness;
      double v = 0.0;
      switch (kind) {
        case ExperimentKind::NormDeficit:
          v = sup_value - operator_norm(toeplitz_matrix(*ctx, f));
          if (v < 0.0 && v > -1e-10) v = 0.0;  // roundoff clamp at the contraction edge
          break;
        case ExperimentKind::Commutator:
          v = commutator_residual(*ctx, f, *g);
          break;
        case ExperimentKind::Star1:
          v = star_truncation_residual(*ctx, f, *g, 1);
          break;
        case ExperimentKind::Star2:
          v = star_truncation_residual(*ctx, f, *g, 2, &*c1);
          break;
        case ExperimentKind::Tuynman:
          v = tuynman_residual(*ctx, f, opt.kappa);
          break;
        case ExperimentKind::Adjointness: {
          std::mt19937_64 rng(opt.seed + static_cast<unsigned>(m));
          for (int i = 0; i < opt.adjointness_pairs; ++i) {
            const Observable fi =
                parse_observable(random_observable_expression(model.kind(), rng), model.kind());
            OperatorMatrix a{random_hermitian(rng, ctx->dim()), ctx->level()};
            v = std::max(v, hs_adjointness_residual(*ctx, fi, a));
          }
          break;
        }
      }
      series.push(m, v);
    } catch (const std::exception& e) {
      throw std::runtime_error("level m=" + std::to_string(m) + ": " + e.what());
    }
  }
  return series;
}

std::string random_observable_expression(ModelKind kind, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  char buf[64];
  std::string out;
  auto add = [&](const std::string& atom) {
    std::snprintf(buf, sizeof(buf), "%.6f", coeff(rng));
    if (!out.empty()) out += " + ";
    out += buf;
    if (!atom.empty()) out += "*" + atom;
  };
  if (kind == ModelKind::Sphere) {
    add("");
    for (const char* a : {"x1", "x2", "x3"}) add(a);
    for (const char* a : {"x1*x1", "x1*x2", "x1*x3", "x2*x2", "x2*x3", "x3*x3"}) add(a);
  } else {
    add("");
    for (const char* a : {"c(1,0)", "s(1,0)", "c(0,1)", "s(0,1)", "c(1,1)", "s(1,1)"}) add(a);
  }
  return out;
}

Matrix random_hermitian(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix b(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) b(i, j) = Complex(gauss(rng), gauss(rng));
  Matrix h = 0.5 * (b + b.adjoint().eval()) / std::sqrt(static_cast<double>(dim));
  return h;
}

}  // namespace btq
