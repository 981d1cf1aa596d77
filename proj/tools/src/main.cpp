#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "mrsens/errors.hpp"
#include "mrsens/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

void add_common_flags(CLI::App* cmd, mrsens::cli::RunConfig& cfg) {
  cmd->add_option("--seed", cfg.seed, "RNG seed");
  cmd->add_option("--out", cfg.out, "output directory");
  cmd->add_option("--format", cfg.format, "csv|json output for tables");
  cmd->add_option("--threads", cfg.threads, "worker threads (0 = hardware)");
}

void add_model_flags(CLI::App* cmd, mrsens::cli::RunConfig& cfg) {
  cmd->add_option("--k", cfg.k, "number of visits (cross-checked against the CSV)");
  cmd->add_option("--m", cfg.m, "Markov order (2m+1 < K)");
}

void add_estimator_flags(CLI::App* cmd, mrsens::cli::RunConfig& cfg) {
  cmd->add_option("--estimator", cfg.estimator, "empirical|forest");
  cmd->add_option("--trees", cfg.trees, "forest: number of trees");
  cmd->add_option("--max-depth", cfg.max_depth, "forest: maximum depth");
  cmd->add_option("--min-leaf", cfg.min_leaf, "forest: minimum leaf size");
  cmd->add_option("--smoothing", cfg.smoothing, "empirical: Laplace smoothing");
}

void add_bootstrap_flags(CLI::App* cmd, mrsens::cli::RunConfig& cfg) {
  cmd->add_option("--bootstrap", cfg.bootstrap_b, "bootstrap replicates B");
  cmd->add_option("--bootstrap-kind", cfg.bootstrap_kind, "parametric|nonparametric");
  cmd->add_option("--level", cfg.level, "CI level");
  cmd->add_option("--anchor-lo", cfg.anchor_lo, "alpha anchor for the missing=0 SE");
  cmd->add_option("--anchor-hi", cfg.anchor_hi, "alpha anchor for the missing=1 SE");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Markov-restricted sensitivity analysis for trials with "
               "non-monotone missing binary outcomes"};
  app.set_version_flag("--version", mrsens::kVersion);
  app.require_subcommand(1);

  mrsens::cli::RunConfig cfg;
  std::string manifest_path;

  auto* patterns = app.add_subcommand("patterns", "missingness pattern summary");
  patterns->add_option("--input", cfg.input, "arm CSV")->required();
  add_model_flags(patterns, cfg);
  add_common_flags(patterns, cfg);

  auto* fit = app.add_subcommand("fit", "estimate the observed-data law + fit diagnostic");
  fit->add_option("--input", cfg.input, "arm CSV")->required();
  add_model_flags(fit, cfg);
  add_estimator_flags(fit, cfg);
  add_common_flags(fit, cfg);

  auto* identify = app.add_subcommand("identify", "identified outcome law for one tilt");
  identify->add_option("--input", cfg.input, "arm CSV")->required();
  identify->add_option("--alpha", cfg.alpha, "scalar, vector, or missing0|missing1");
  identify->add_option("--functional", cfg.functional, "count | mean:<k> | joint:<bits>");
  add_model_flags(identify, cfg);
  add_estimator_flags(identify, cfg);
  add_common_flags(identify, cfg);

  auto* sens = app.add_subcommand("sensitivity", "alpha-grid estimates with bootstrap CIs");
  sens->add_option("--input", cfg.input, "arm CSV")->required();
  sens->add_option("--alpha-grid", cfg.alpha_grid, "lo:hi:step")->required();
  sens->add_option("--functional", cfg.functional, "functional");
  add_model_flags(sens, cfg);
  add_estimator_flags(sens, cfg);
  add_bootstrap_flags(sens, cfg);
  add_common_flags(sens, cfg);

  auto* contour = app.add_subcommand("contour", "two-arm difference grid");
  contour->add_option("--input", cfg.input, "arm A CSV")->required();
  contour->add_option("--input-b", cfg.input_b, "arm B CSV")->required();
  contour->add_option("--alpha-grid", cfg.alpha_grid, "arm A grid lo:hi:step")->required();
  contour->add_option("--alpha-grid-b", cfg.alpha_grid_b, "arm B grid (defaults to A's)");
  contour->add_option("--functional", cfg.functional, "functional");
  add_model_flags(contour, cfg);
  add_estimator_flags(contour, cfg);
  add_bootstrap_flags(contour, cfg);
  add_common_flags(contour, cfg);

  auto* boot = app.add_subcommand("bootstrap", "CI for one analysis");
  boot->add_option("--input", cfg.input, "arm CSV")->required();
  boot->add_option("--alpha", cfg.alpha, "alpha value or mcar|missing0|missing1");
  boot->add_option("--functional", cfg.functional, "functional");
  add_model_flags(boot, cfg);
  add_estimator_flags(boot, cfg);
  add_bootstrap_flags(boot, cfg);
  add_common_flags(boot, cfg);

  auto* diag = app.add_subcommand("diagnose", "missing-vs-observed marginal differences");
  diag->add_option("--input", cfg.input, "arm CSV")->required();
  diag->add_option("--alpha-grid", cfg.alpha_grid, "lo:hi:step")->required();
  add_model_flags(diag, cfg);
  add_estimator_flags(diag, cfg);
  add_common_flags(diag, cfg);

  auto* sim = app.add_subcommand("simulate", "simulation study around a fitted law");
  sim->add_option("--input", cfg.input, "arm CSV to fit the generating law");
  sim->add_option("--law", cfg.law_file, "fitted observed-law JSON (alternative input)");
  sim->add_option("--alpha-grid", cfg.alpha_grid, "lo:hi:step");
  sim->add_option("--n-list", cfg.n_list, "comma list of sample sizes");
  sim->add_option("--reps", cfg.reps, "Monte Carlo replications");
  sim->add_option("--functional", cfg.functional, "functional");
  add_model_flags(sim, cfg);
  add_estimator_flags(sim, cfg);
  add_bootstrap_flags(sim, cfg);
  add_common_flags(sim, cfg);

  auto* check = app.add_subcommand("check-model", "verify the identification lemmas");
  check->add_option("--k", cfg.k, "number of visits")->required();
  check->add_option("--m", cfg.m, "Markov order");
  check->add_option("--seeds", cfg.check_seeds, "oracle seeds per statement");
  add_common_flags(check, cfg);

  auto* replay = app.add_subcommand("replay", "re-run a recorded manifest");
  replay->add_option("manifest", manifest_path, "manifest.json path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (replay->parsed()) {
      mrsens::cli::replay(manifest_path);
    } else {
      cfg.command = app.get_subcommands().front()->get_name();
      mrsens::cli::run(cfg);
    }
    return kExitOk;
  } catch (const mrsens::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const mrsens::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const mrsens::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
