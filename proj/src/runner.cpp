#include "btq/runner.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>

#include <json.hpp>

#include "btq/format.hpp"
#include "btq/parallel.hpp"
#include "btq/parser.hpp"
#include "btq/random.hpp"

namespace btq {

namespace {

using nlohmann::json;

KahlerModel make_model(ModelKind kind, Complex tau) {
  return kind == ModelKind::Sphere ? KahlerModel::sphere() : KahlerModel::torus(tau);
}

std::vector<int> default_m_list(RunKind kind) {
  switch (kind) {
    case RunKind::Tuynman: return {5, 10, 20, 40};
    case RunKind::Epsilon: return {4, 8, 16, 32, 64};
    case RunKind::Adjointness: return {6, 8, 16};
    case RunKind::Dims: {
      std::vector<int> all(128);
      for (int i = 0; i < 128; ++i) all[i] = i + 1;
      return all;
    }
    default: return {8, 16, 32, 64, 128};
  }
}

SweepOptions sweep_options(const ExperimentConfig& cfg) {
  SweepOptions opt;
  opt.extra_degree = cfg.extra_degree;
  opt.torus_grid = cfg.torus_grid;
  opt.m_ref = cfg.m_ref;
  opt.sup_refinement = cfg.sup_refinement;
  opt.seed = cfg.seed;
  return opt;
}

Verdict make_fit_verdict(const ConvergenceSeries& series, const SlopeFit& fit, bool pass,
                         const std::string& detail) {
  Verdict v;
  v.experiment = series.experiment;
  v.model = series.model;
  v.f_label = series.f_label;
  v.g_label = series.g_label;
  if (!fit.degenerate) {
    v.slope = fit.slope;
    v.r2 = fit.r2;
  }
  v.window = std::make_pair(fit.window_lo, fit.window_hi);
  v.pass = pass;
  v.trivial = fit.degenerate;
  v.detail = detail;
  return v;
}

struct Runner {
  const ExperimentConfig& cfg;
  RunOutput& out;
  ContextCache cache;

  std::vector<int> m_list(RunKind kind) const {
    return cfg.m_list.empty() ? default_m_list(kind) : cfg.m_list;
  }

  std::vector<std::pair<std::string, std::string>> pairs(RunKind kind, ModelKind model) const {
    if (!cfg.f_exprs.empty()) {
      std::vector<std::pair<std::string, std::string>> out_pairs;
      for (std::size_t i = 0; i < cfg.f_exprs.size(); ++i)
        out_pairs.emplace_back(cfg.f_exprs[i],
                               cfg.g_exprs.empty() ? std::string() : cfg.g_exprs[i]);
      return out_pairs;
    }
    return default_pairs(kind, model, cfg.seed);
  }

  void add(ConvergenceSeries series, Verdict verdict) {
    out.series.push_back(std::move(series));
    verdict.pass |= verdict.trivial;
    out.all_pass &= verdict.pass;
    out.verdicts.push_back(std::move(verdict));
  }

  void add_verdict(Verdict verdict) {
    out.all_pass &= verdict.pass;
    out.verdicts.push_back(std::move(verdict));
  }

  void dump_toeplitz(const KahlerModel& model, const Observable& f, int f_index,
                     const std::vector<int>& levels) {
    const SweepOptions opt = sweep_options(cfg);
    for (int m : levels) {
      const int extra = required_extra_degree(ExperimentKind::NormDeficit, model, f, nullptr, opt);
      const int grid = required_torus_grid(ExperimentKind::NormDeficit, model, m, f, nullptr, opt);
      auto ctx = cache.get(model, m, extra, grid);
      std::ostringstream ss;
      write_matrix_text(ss, toeplitz_matrix(*ctx, f), model.kind());
      out.artifacts.emplace_back("matrices/toeplitz_" + std::string(model_name(model.kind())) +
                                     "_f" + std::to_string(f_index) + "_m" + std::to_string(m) +
                                     ".txt",
                                 ss.str());
    }
  }

  void run_norm(const KahlerModel& model) {
    const auto levels = m_list(RunKind::Norm);
    int f_index = 0;
    for (const auto& [fe, ge] : pairs(RunKind::Norm, model.kind())) {
      const Observable f = parse_observable(fe, model.kind());
      ConvergenceSeries s =
          sweep(model, f, nullptr, ExperimentKind::NormDeficit, levels, sweep_options(cfg), &cache);
      s.f_label = fe;
      if (cfg.dump_matrices) dump_toeplitz(model, f, f_index, levels);
      ++f_index;
      bool pass = true;
      std::string detail;
      for (double v : s.value) pass &= v >= 0.0;
      if (!pass) detail = "negative deficit";
      if (pass && s.value.size() >= 2) {
        const double first = s.value.front(), last = s.value.back();
        const double span = double(s.m.back()) / s.m.front();
        if (span >= 16.0 && first > kDegenerateFloor) {
          pass = last <= first / 4.0;
          if (!pass) detail = "deficit decayed by less than 4x";
        } else {
          pass = last <= first * (1.0 + 1e-9) || first <= kDegenerateFloor;
          if (!pass) detail = "deficit not decreasing";
        }
      }
      Verdict v;
      v.experiment = s.experiment;
      v.model = s.model;
      v.f_label = fe;
      v.pass = pass;
      v.detail = detail.empty() ? "nonnegative and decaying" : detail;
      add(std::move(s), std::move(v));
    }
  }

  void run_commutator(const KahlerModel& model) {
    const auto levels = m_list(RunKind::Commutator);
    for (const auto& [fe, ge] : pairs(RunKind::Commutator, model.kind())) {
      const Observable f = parse_observable(fe, model.kind());
      const Observable g = parse_observable(ge, model.kind());
      ConvergenceSeries s =
          sweep(model, f, &g, ExperimentKind::Commutator, levels, sweep_options(cfg), &cache);
      s.f_label = fe;
      s.g_label = ge;
      const SlopeFit fit = fit_slope(s, cfg.window_lo, cfg.window_hi, cfg.degenerate_floor);
      bool pass;
      std::string detail;
      if (fit.degenerate) {
        pass = true;
        detail = "degenerate series (residual at the roundoff floor)";
      } else {
        pass = fit.slope >= -1.6 && fit.slope <= -0.6 && fit.r2 >= 0.95;
        detail = "slope in [-1.6,-0.6], R^2 >= 0.95";
      }
      Verdict v = make_fit_verdict(s, fit, pass, detail);
      add(std::move(s), std::move(v));
    }
  }

  void run_star(const KahlerModel& model) {
    const auto levels = m_list(RunKind::Star);
    for (const auto& [fe, ge] : pairs(RunKind::Star, model.kind())) {
      const Observable f = parse_observable(fe, model.kind());
      const Observable g = parse_observable(ge, model.kind());

      ConvergenceSeries s1 =
          sweep(model, f, &g, ExperimentKind::Star1, levels, sweep_options(cfg), &cache);
      s1.f_label = fe;
      s1.g_label = ge;
      const SlopeFit fit1 = fit_slope(s1, cfg.window_lo, cfg.window_hi, cfg.degenerate_floor);
      const bool pass1 = fit1.degenerate || (fit1.slope >= -1.5 && fit1.slope <= -0.7);
      Verdict v1 = make_fit_verdict(s1, fit1, pass1,
                                    fit1.degenerate ? "degenerate series"
                                                    : "slope in [-1.5,-0.7]");
      add(std::move(s1), std::move(v1));

      // The second-order check needs the coefficient-estimate error
      // B/(m*m_ref) to stay below the A/m^2 remainder across the window;
      // that holds for the sphere pairs but not for the default torus pair
      // at m_ref = 96 (its second-order coefficient is ~10x the first), so
      // the torus runs it only when observables are configured explicitly.
      if (model.is_sphere() || !cfg.f_exprs.empty()) {
        std::vector<int> levels2;
        for (int m : levels)
          if (m < cfg.m_ref) levels2.push_back(m);
        ConvergenceSeries s2 =
            sweep(model, f, &g, ExperimentKind::Star2, levels2, sweep_options(cfg), &cache);
        s2.f_label = fe;
        s2.g_label = ge;
        const SlopeFit fit2 =
            fit_slope(s2, cfg.window_lo, std::min(cfg.window_hi, cfg.m_ref - 1),
                      cfg.degenerate_floor);
        const bool pass2 = fit2.degenerate || fit2.slope <= -1.5;
        Verdict v2 = make_fit_verdict(s2, fit2, pass2,
                                      fit2.degenerate ? "degenerate series"
                                                      : "slope <= -1.5 with estimated C1");
        add(std::move(s2), std::move(v2));
      }
    }

    // Antisymmetry of the estimated first coefficient along a reference
    // ladder; uses the first configured pair.
    const auto pair_list = pairs(RunKind::Star, model.kind());
    if (!pair_list.empty()) {
      const auto& [fe, ge] = pair_list.front();
      const Observable f = parse_observable(fe, model.kind());
      const Observable g = parse_observable(ge, model.kind());
      ConvergenceSeries sc;
      sc.experiment = "c1-antisym";
      sc.model = model_name(model.kind());
      sc.f_label = fe;
      sc.g_label = ge;
      for (int mr : cfg.c1_ladder)
        sc.push(mr, c1_antisymmetry_residual(model, f, g, mr, sweep_options(cfg), &cache));
      bool trivial = true;
      for (double x : sc.value) trivial &= x <= cfg.degenerate_floor;
      bool pass = true;
      if (!trivial) {
        for (std::size_t i = 1; i < sc.value.size(); ++i)
          pass &= sc.value[i] <= 1.1 * sc.value[i - 1];
        if (sc.value.size() >= 2) pass &= sc.value.back() <= sc.value.front() / 3.0;
      }
      Verdict v;
      v.experiment = sc.experiment;
      v.model = sc.model;
      v.f_label = fe;
      v.g_label = ge;
      v.pass = pass;
      v.trivial = trivial;
      v.detail = trivial ? "degenerate series (residual at the roundoff floor)"
                         : "non-increasing (10% margin), final <= initial/3";
      add(std::move(sc), std::move(v));
    }
  }

  void run_tuynman(const KahlerModel& model) {
    const auto levels = m_list(RunKind::Tuynman);
    const double tol =
        cfg.tol_tuynman > 0 ? cfg.tol_tuynman : (model.is_sphere() ? 1e-8 : 1e-7);
    for (const auto& [fe, ge] : pairs(RunKind::Tuynman, model.kind())) {
      const Observable f = parse_observable(fe, model.kind());
      ConvergenceSeries s =
          sweep(model, f, nullptr, ExperimentKind::Tuynman, levels, sweep_options(cfg), &cache);
      s.f_label = fe;
      double worst = 0.0;
      for (double v : s.value) worst = std::max(worst, v);
      Verdict v;
      v.experiment = s.experiment;
      v.model = s.model;
      v.f_label = fe;
      v.pass = worst <= tol;
      v.detail = "max residual " + format_double(worst) + " vs tolerance " + format_double(tol);
      add(std::move(s), std::move(v));
    }
  }

  void run_epsilon(const KahlerModel& model) {
    const auto levels = m_list(RunKind::Epsilon);
    ConvergenceSeries trace, flat;
    trace.experiment = "epsilon-trace";
    flat.experiment = "epsilon-flatness";
    trace.model = flat.model = model_name(model.kind());
    bool pass = true;
    std::string detail;
    for (int m : levels) {
      auto ctx = cache.get(model, m, cfg.extra_degree,
                           cfg.torus_grid > 0 ? cfg.torus_grid
                                              : (model.is_torus() ? default_torus_grid(m, 4) : 0));
      const SymbolField eps = epsilon_function(*ctx);
      const double total = integrate(ctx->rule(), eps.values).real();
      const double trace_residual = std::abs(total - ctx->dim());
      trace.push(m, trace_residual);
      pass &= trace_residual <= 1e-10;

      double lo = eps.values.front().real(), hi = lo, mean = 0;
      for (const auto& e : eps.values) {
        lo = std::min(lo, e.real());
        hi = std::max(hi, e.real());
        mean += e.real();
      }
      mean /= double(eps.values.size());
      flat.push(m, (hi - lo) / mean);
      if (model.is_sphere()) {
        const double expected = (m + 1) / (2.0 * kPi);
        const double dev = std::max(std::abs(hi - expected), std::abs(lo - expected));
        pass &= dev <= cfg.tol_epsilon;
        if (dev > cfg.tol_epsilon) detail = "sphere density not constant at level " + std::to_string(m);
      } else {
        detail += (detail.empty() ? "" : "; ") + std::string("m=") + std::to_string(m) +
                  " min=" + format_double(lo) + " max=" + format_double(hi);
      }
    }
    Verdict v;
    v.experiment = "epsilon";
    v.model = model_name(model.kind());
    v.pass = pass;
    v.detail = detail.empty() ? "trace and flatness within tolerance" : detail;
    out.series.push_back(std::move(trace));
    out.series.push_back(std::move(flat));
    add_verdict(std::move(v));
  }

  void run_adjointness(const KahlerModel& model) {
    const auto levels = m_list(RunKind::Adjointness);
    const Observable one = Observable::constant(model.kind(), Complex(1, 0));
    ConvergenceSeries s = sweep(model, one, nullptr, ExperimentKind::Adjointness, levels,
                                sweep_options(cfg), &cache);
    s.f_label = "random";
    s.g_label = "random";
    double worst = 0.0;
    for (double v : s.value) worst = std::max(worst, v);
    Verdict v;
    v.experiment = s.experiment;
    v.model = s.model;
    v.f_label = "random";
    v.pass = worst <= cfg.tol_adjointness;
    v.detail = "max residual " + format_double(worst) + " over " +
               std::to_string(levels.size() * 10) + " random (f, A) pairs";
    add(std::move(s), std::move(v));
  }

  void run_dims(const KahlerModel& model) {
    const auto levels = m_list(RunKind::Dims);
    ConvergenceSeries s;
    s.experiment = "dims";
    s.model = model_name(model.kind());
    bool pass = true;
    for (int m : levels) {
      const SectionBasis basis(model, m);
      const int expected = model.is_sphere() ? m + 1 : m;
      pass &= basis.dim() == expected;
      s.push(m, static_cast<double>(basis.dim()));
    }
    // Full-rank cross-check on a few small levels: context construction
    // verifies positive-definiteness of the Gram matrix.
    for (int m : {1, 2, 3, 5, 8}) {
      try {
        cache.get(model, m, cfg.extra_degree,
                  cfg.torus_grid > 0 ? cfg.torus_grid
                                     : (model.is_torus() ? default_torus_grid(m, 4) : 0));
      } catch (const std::exception&) {
        pass = false;
      }
    }
    Verdict v;
    v.experiment = "dims";
    v.model = model_name(model.kind());
    v.pass = pass;
    v.detail = model.is_sphere() ? "d(m) = m+1, Gram full rank" : "d(m) = m, Gram full rank";
    out.series.push_back(std::move(s));
    add_verdict(std::move(v));
  }

  void run_calibrate() {
    CalibrationReport report = calibrate(cfg);
    out.calibration = report;
    Verdict v;
    v.experiment = "calibrate";
    v.model = "sphere";
    v.pass = report.kappa == kLaplaceKappa && report.residuals.at(report.kappa) <= 1e-8 &&
             report.torus_cross_residual <= 1e-7;
    std::string detail = "kappa = " + format_double(report.kappa) + "; residuals:";
    for (const auto& [k, r] : report.residuals)
      detail += " (" + format_double(k) + ": " + format_double(r) + ")";
    detail += "; torus cross-check " + format_double(report.torus_cross_residual);
    v.detail = detail;
    add_verdict(std::move(v));
  }

  void run_kind(RunKind kind, const KahlerModel& model) {
    switch (kind) {
      case RunKind::Norm: run_norm(model); break;
      case RunKind::Commutator: run_commutator(model); break;
      case RunKind::Star: run_star(model); break;
      case RunKind::Tuynman: run_tuynman(model); break;
      case RunKind::Epsilon: run_epsilon(model); break;
      case RunKind::Adjointness: run_adjointness(model); break;
      case RunKind::Dims: run_dims(model); break;
      default: break;
    }
  }
};

}  // namespace

std::vector<std::pair<std::string, std::string>> default_pairs(RunKind kind, ModelKind model,
                                                               unsigned seed) {
  std::vector<std::pair<std::string, std::string>> out;
  const bool sphere = model == ModelKind::Sphere;
  switch (kind) {
    case RunKind::Commutator:
    case RunKind::Star:
      if (sphere) {
        out = {{"x3", "x1"}, {"x3", "x2"}, {"x1", "x2"}};
      } else {
        out = {{"c(1,0)", "s(1,0)"}};
      }
      break;
    case RunKind::Tuynman:
      if (sphere)
        out = {{"x3", ""}, {"x1", ""}, {"x2", ""}, {"x3*x1 + 0.5*x2", ""}};
      else
        out = {{"c(1,0)", ""}, {"s(1,0)", ""}, {"c(1,1)", ""}, {"c(0,1) + 0.25*s(1,1)", ""}};
      break;
    case RunKind::Norm: {
      std::mt19937_64 rng(seed);
      if (sphere)
        out.push_back({"x3", ""});
      else
        out.push_back({"c(1,0)", ""});
      for (int i = 0; i < 5; ++i)
        out.push_back({random_observable_expression(model, rng), ""});
      break;
    }
    default:
      out = {{sphere ? "x3" : "c(1,0)", ""}};
      break;
  }
  return out;
}

CalibrationReport calibrate(const ExperimentConfig& cfg) {
  CalibrationReport report;
  const KahlerModel sphere = KahlerModel::sphere();
  const std::vector<Observable> probes{Observable::x3(), Observable::x1()};
  ContextCache cache;
  auto ctx = cache.get(sphere, 10, std::max(cfg.extra_degree, 6), 0);

  double best = std::numeric_limits<double>::infinity();
  for (double kappa : {1.0, -1.0, 2.0, -2.0, 4.0, -4.0}) {
    double residual = 0.0;
    for (const auto& f : probes)
      residual = std::max(residual, tuynman_residual(*ctx, f, kappa));
    report.residuals[kappa] = residual;
    if (residual < best) {
      best = residual;
      report.kappa = kappa;
    }
  }
  if (best > 1e-6)
    throw std::runtime_error("calibration failed: no Laplacian normalization reaches 1e-6");

  const KahlerModel torus = KahlerModel::torus(cfg.tau.imag() > 0 ? cfg.tau : Complex(0, 1));
  auto tctx = cache.get(torus, 10, cfg.extra_degree, default_torus_grid(10, 4));
  report.torus_cross_residual =
      tuynman_residual(*tctx, Observable::fourier_cos(1, 0), report.kappa);
  return report;
}

RunOutput execute(const ExperimentConfig& cfg) {
  set_thread_count(cfg.threads);
  RunOutput out;
  Runner runner{cfg, out, {}};

  std::vector<KahlerModel> models;
  if (cfg.kind == RunKind::All && !cfg.model_set && cfg.f_exprs.empty()) {
    models.push_back(KahlerModel::sphere());
    models.push_back(KahlerModel::torus(cfg.tau));
  } else {
    models.push_back(make_model(cfg.model, cfg.tau));
  }

  if (cfg.kind == RunKind::Calibrate) {
    runner.run_calibrate();
    return out;
  }
  if (cfg.kind == RunKind::All) {
    runner.run_calibrate();
    for (const auto& model : models)
      for (RunKind k : {RunKind::Dims, RunKind::Norm, RunKind::Commutator, RunKind::Star,
                        RunKind::Tuynman, RunKind::Epsilon, RunKind::Adjointness})
        runner.run_kind(k, model);
    return out;
  }
  for (const auto& model : models) runner.run_kind(cfg.kind, model);
  return out;
}

std::string series_csv(const std::vector<ConvergenceSeries>& series) {
  std::string csv = "experiment,model,f,g,m,value\n";
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.m.size(); ++i) {
      csv += s.experiment;
      csv += ',';
      csv += s.model;
      csv += ",\"" + s.f_label + "\",\"" + s.g_label + "\",";
      csv += std::to_string(s.m[i]);
      csv += ',';
      csv += format_double(s.value[i]);
      csv += '\n';
    }
  return csv;
}

std::string verdicts_json(const std::vector<Verdict>& verdicts) {
  json arr = json::array();
  for (const auto& v : verdicts) {
    json item;
    item["experiment"] = v.experiment;
    item["model"] = v.model;
    item["f"] = v.f_label;
    item["g"] = v.g_label;
    if (v.slope)
      item["slope"] = *v.slope;
    else
      item["slope"] = nullptr;
    if (v.r2)
      item["r2"] = *v.r2;
    else
      item["r2"] = nullptr;
    if (v.window)
      item["window"] = {v.window->first, v.window->second};
    else
      item["window"] = nullptr;
    item["pass"] = v.pass;
    item["trivial"] = v.trivial;
    item["detail"] = v.detail;
    arr.push_back(item);
  }
  return arr.dump(2) + "\n";
}

int run(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  RunOutput out = execute(cfg);
  const auto t1 = std::chrono::steady_clock::now();

  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);

  {
    std::ofstream f(fs::path(cfg.out_dir) / "series.csv", std::ios::binary);
    f << series_csv(out.series);
  }
  {
    std::ofstream f(fs::path(cfg.out_dir) / "verdicts.json", std::ios::binary);
    f << verdicts_json(out.verdicts);
  }
  for (const auto& [rel, content] : out.artifacts) {
    const fs::path p = fs::path(cfg.out_dir) / rel;
    fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    f << content;
  }
  {
    json manifest;
    manifest["kind"] = run_kind_name(cfg.kind);
    const bool both_models =
        cfg.kind == RunKind::All && !cfg.model_set && cfg.f_exprs.empty();
    manifest["model"] = both_models ? json("both") : json(model_name(cfg.model));
    manifest["tau"] = {cfg.tau.real(), cfg.tau.imag()};
    manifest["m"] = cfg.m_list.empty() ? json("per-kind defaults") : json(cfg.m_list);
    manifest["mref"] = cfg.m_ref;
    manifest["c1_ladder"] = cfg.c1_ladder;
    manifest["extra_degree"] = cfg.extra_degree;
    manifest["torus_grid"] = cfg.torus_grid;
    manifest["sup_refinement"] = cfg.sup_refinement;
    manifest["window"] = {cfg.window_lo, cfg.window_hi};
    manifest["threads"] = cfg.threads;
    manifest["seed"] = cfg.seed;
    manifest["kappa"] = out.calibration ? out.calibration->kappa : kLaplaceKappa;
    manifest["tolerances"] = {{"tuynman", cfg.tol_tuynman},
                              {"adjointness", cfg.tol_adjointness},
                              {"epsilon", cfg.tol_epsilon},
                              {"floor", cfg.degenerate_floor}};
    std::map<std::string, std::string> quad;
    for (const auto& s : out.series)
      if (!s.quadrature.empty()) quad[s.experiment + "/" + s.model] = s.quadrature;
    manifest["quadrature"] = quad;
    manifest["series"] = out.series.size();
    manifest["wall_time_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
    if (out.calibration) {
      json cal;
      cal["kappa"] = out.calibration->kappa;
      for (const auto& [k, r] : out.calibration->residuals)
        cal["residuals"][format_double(k)] = r;
      cal["torus_cross_residual"] = out.calibration->torus_cross_residual;
      manifest["calibration"] = cal;
    }
    std::ofstream f(fs::path(cfg.out_dir) / "run-manifest.json", std::ios::binary);
    f << manifest.dump(2) << "\n";
  }

  for (const auto& v : out.verdicts)
    std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << v.experiment << " " << v.model
              << (v.f_label.empty() ? "" : " f=" + v.f_label)
              << (v.g_label.empty() ? "" : " g=" + v.g_label)
              << (v.trivial ? " (trivial)" : "") << " -- " << v.detail << "\n";

  return out.all_pass ? 0 : 2;
}

}  // namespace btq
