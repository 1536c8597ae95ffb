#include "btq/config.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include "btq/parser.hpp"

namespace btq {

const char* run_kind_name(RunKind kind) {
  switch (kind) {
    case RunKind::Dims: return "dims";
    case RunKind::Calibrate: return "calibrate";
    case RunKind::Norm: return "norm";
    case RunKind::Commutator: return "commutator";
    case RunKind::Star: return "star";
    case RunKind::Tuynman: return "tuynman";
    case RunKind::Epsilon: return "epsilon";
    case RunKind::Adjointness: return "adjointness";
    case RunKind::All: return "all";
  }
  return "unknown";
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, int line, const std::string& key) {
  double x = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(line, "malformed number for '" + key + "': " + v);
  return x;
}

long parse_int(const std::string& v, int line, const std::string& key) {
  long x = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(line, "malformed integer for '" + key + "': " + v);
  return x;
}

std::vector<int> parse_int_list(const std::string& v, int line, const std::string& key) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError(line, "empty entry in '" + key + "' list");
    out.push_back(static_cast<int>(parse_int(item, line, key)));
  }
  if (out.empty()) throw ConfigError(line, "'" + key + "' list is empty");
  return out;
}

void check_ascending(const std::vector<int>& m, int line, const std::string& key) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] < 1) throw ConfigError(line, "'" + key + "' entries must be >= 1");
    if (i > 0 && m[i] <= m[i - 1])
      throw ConfigError(line, "'" + key + "' list must be strictly ascending");
  }
}

}  // namespace

std::vector<int> parse_m_list(const std::string& text) {
  auto list = parse_int_list(text, 0, "m");
  check_ascending(list, 0, "m");
  return list;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::vector<std::pair<int, std::string>> f_lines, g_lines;

  std::istringstream is(text);
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string entry = trim(raw);
    if (entry.empty()) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "expected 'key = value'");
    const std::string key = trim(entry.substr(0, eq));
    const std::string value = trim(entry.substr(eq + 1));
    if (key.empty()) throw ConfigError(line, "missing key");
    if (value.empty()) throw ConfigError(line, "missing value for '" + key + "'");

    if (key != "f" && key != "g" && !seen.insert(key).second)
      throw ConfigError(line, "duplicate key '" + key + "'");

    if (key == "model") {
      if (value == "sphere")
        cfg.model = ModelKind::Sphere;
      else if (value == "torus")
        cfg.model = ModelKind::Torus;
      else
        throw ConfigError(line, "model must be 'sphere' or 'torus'");
      cfg.model_set = true;
    } else if (key == "tau") {
      std::istringstream ts(value);
      double re = 0, im = 0;
      if (!(ts >> re >> im)) throw ConfigError(line, "tau needs two reals: 're im'");
      std::string tail;
      if (ts >> tail) throw ConfigError(line, "tau needs exactly two reals");
      if (!(im > 0.0)) throw ConfigError(line, "Im tau must be positive");
      cfg.tau = Complex(re, im);
    } else if (key == "kind") {
      bool ok = false;
      for (RunKind k : {RunKind::Dims, RunKind::Calibrate, RunKind::Norm, RunKind::Commutator,
                        RunKind::Star, RunKind::Tuynman, RunKind::Epsilon, RunKind::Adjointness,
                        RunKind::All}) {
        if (value == run_kind_name(k)) {
          cfg.kind = k;
          ok = true;
          break;
        }
      }
      if (!ok) throw ConfigError(line, "unknown kind '" + value + "'");
    } else if (key == "f") {
      f_lines.emplace_back(line, value);
    } else if (key == "g") {
      g_lines.emplace_back(line, value);
    } else if (key == "m") {
      cfg.m_list = parse_int_list(value, line, "m");
      check_ascending(cfg.m_list, line, "m");
    } else if (key == "c1_ladder") {
      cfg.c1_ladder = parse_int_list(value, line, "c1_ladder");
      check_ascending(cfg.c1_ladder, line, "c1_ladder");
    } else if (key == "mref") {
      cfg.m_ref = static_cast<int>(parse_int(value, line, key));
      if (cfg.m_ref < 1) throw ConfigError(line, "mref must be >= 1");
    } else if (key == "extra_degree") {
      cfg.extra_degree = static_cast<int>(parse_int(value, line, key));
      if (cfg.extra_degree < 0) throw ConfigError(line, "extra_degree must be >= 0");
    } else if (key == "torus_grid") {
      cfg.torus_grid = static_cast<int>(parse_int(value, line, key));
      if (cfg.torus_grid != 0 && cfg.torus_grid < 4)
        throw ConfigError(line, "torus_grid must be 0 (auto) or >= 4");
    } else if (key == "sup_refinement") {
      cfg.sup_refinement = static_cast<int>(parse_int(value, line, key));
      if (cfg.sup_refinement < 16) throw ConfigError(line, "sup_refinement must be >= 16");
    } else if (key == "threads") {
      cfg.threads = static_cast<int>(parse_int(value, line, key));
      if (cfg.threads < 1) throw ConfigError(line, "threads must be >= 1");
    } else if (key == "seed") {
      cfg.seed = static_cast<unsigned>(parse_int(value, line, key));
    } else if (key == "out") {
      cfg.out_dir = value;
    } else if (key == "window") {
      const auto colon = value.find(':');
      if (colon == std::string::npos) throw ConfigError(line, "window must be 'lo:hi'");
      cfg.window_lo = static_cast<int>(parse_int(trim(value.substr(0, colon)), line, key));
      cfg.window_hi = static_cast<int>(parse_int(trim(value.substr(colon + 1)), line, key));
      if (cfg.window_lo < 1 || cfg.window_hi <= cfg.window_lo)
        throw ConfigError(line, "window must satisfy 1 <= lo < hi");
    } else if (key == "tol_tuynman") {
      cfg.tol_tuynman = parse_double(value, line, key);
    } else if (key == "tol_adjointness") {
      cfg.tol_adjointness = parse_double(value, line, key);
    } else if (key == "tol_epsilon") {
      cfg.tol_epsilon = parse_double(value, line, key);
    } else if (key == "floor") {
      cfg.degenerate_floor = parse_double(value, line, key);
    } else if (key == "dump_matrices") {
      if (value == "0" || value == "false")
        cfg.dump_matrices = false;
      else if (value == "1" || value == "true")
        cfg.dump_matrices = true;
      else
        throw ConfigError(line, "dump_matrices must be 0/1/true/false");
    } else {
      throw ConfigError(line, "unknown key '" + key + "'");
    }
  }

  const ModelKind kind = cfg.model;
  for (const auto& [ln, expr] : f_lines) {
    try {
      parse_observable(expr, kind);
    } catch (const ParseError& e) {
      throw ConfigError(ln, std::string("bad expression for 'f': ") + e.what());
    }
    cfg.f_exprs.push_back(expr);
  }
  for (const auto& [ln, expr] : g_lines) {
    try {
      parse_observable(expr, kind);
    } catch (const ParseError& e) {
      throw ConfigError(ln, std::string("bad expression for 'g': ") + e.what());
    }
    cfg.g_exprs.push_back(expr);
  }
  if (!cfg.g_exprs.empty() && cfg.g_exprs.size() != cfg.f_exprs.size())
    throw ConfigError(line, "'g' lines must match 'f' lines one-to-one");
  return cfg;
}

}  // namespace btq
