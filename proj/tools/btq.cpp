// Command-line front end: runs the quantization experiments described by a
// key = value config (or per-kind defaults) and writes series.csv,
// verdicts.json and run-manifest.json.  Exit codes: 0 all verdicts pass,
// 2 a verdict failed, 1 execution error.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "btq/config.hpp"
#include "btq/runner.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::string m_override;
  int threads = 0;
  bool dump_matrices = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "path to a key = value config file");
  cmd->add_option("--out", flags.out_dir, "output directory (default btq-out)");
  cmd->add_option("--m", flags.m_override, "comma-separated ascending level list");
  cmd->add_option("--threads", flags.threads, "worker threads for node evaluation");
  cmd->add_flag("--dump-matrices", flags.dump_matrices,
                "write Toeplitz matrices of the norm experiment under <out>/matrices/");
}

btq::ExperimentConfig load(const CommonFlags& flags, btq::RunKind kind) {
  btq::ExperimentConfig cfg;
  if (!flags.config_path.empty()) {
    std::ifstream in(flags.config_path);
    if (!in) throw std::runtime_error("cannot open config file: " + flags.config_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    cfg = btq::parse_config(ss.str());
  }
  cfg.kind = kind;
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  if (!flags.m_override.empty()) cfg.m_list = btq::parse_m_list(flags.m_override);
  if (flags.threads > 0) cfg.threads = flags.threads;
  if (flags.dump_matrices) cfg.dump_matrices = true;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Berezin-Toeplitz quantization laboratory"};
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* help;
    btq::RunKind kind;
  };
  const Sub subs[] = {
      {"dims", "dimension formula check", btq::RunKind::Dims},
      {"calibrate", "Laplacian normalization search", btq::RunKind::Calibrate},
      {"norm", "operator-norm deficit sweep", btq::RunKind::Norm},
      {"commutator", "rescaled commutator residual sweep", btq::RunKind::Commutator},
      {"star", "star-product truncation sweeps", btq::RunKind::Star},
      {"tuynman", "prequantum/Toeplitz identity residuals", btq::RunKind::Tuynman},
      {"epsilon", "Bergman density checks", btq::RunKind::Epsilon},
      {"adjointness", "Hilbert-Schmidt adjointness residuals", btq::RunKind::Adjointness},
      {"all", "everything above on both models", btq::RunKind::All},
  };

  CommonFlags flags;
  btq::RunKind chosen = btq::RunKind::All;
  for (const auto& sub : subs) {
    CLI::App* cmd = app.add_subcommand(sub.name, sub.help);
    add_common(cmd, flags);
    cmd->callback([&chosen, kind = sub.kind] { chosen = kind; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    return btq::run(load(flags, chosen));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
