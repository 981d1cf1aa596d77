#include "mrsens/simulate.hpp"

#include <cmath>

#include "mrsens/errors.hpp"
#include "mrsens/parallel.hpp"

namespace mrsens {

std::vector<SimulationRow> run_simulation(const ObservedLaw& law, const ModelSpec& spec,
                                          const EstimatorConfig& cfg,
                                          const SimulationDesign& design,
                                          std::uint64_t seed) {
  if (design.alphas.empty() || design.sample_sizes.empty() || design.reps < 1) {
    throw ConfigError("simulation: need alphas, sample sizes and reps >= 1");
  }
  law.validate();

  std::vector<TiltSpec> tilts;
  for (double a : design.alphas) tilts.push_back(TiltSpec::constant(a, spec.K));

  // Truth per alpha from the exact law.
  std::vector<double> truth;
  IdentifyOptions iopts;
  iopts.retain_marginals = false;
  for (const auto& tilt : tilts) {
    FullLawResult res = identify_all(law, spec, tilt, iopts);
    truth.push_back(evaluate_functional(res, design.functional));
  }

  const std::size_t na = design.alphas.size();
  std::vector<SimulationRow> rows;
  for (std::size_t ni = 0; ni < design.sample_sizes.size(); ++ni) {
    int n = design.sample_sizes[ni];
    // estimates[rep][alpha], covered[rep][alpha]
    std::vector<std::vector<double>> estimates(
        static_cast<std::size_t>(design.reps), std::vector<double>(na, 0.0));
    std::vector<std::vector<char>> covered(static_cast<std::size_t>(design.reps),
                                           std::vector<char>(na, 0));

    parallel_for(design.reps, design.threads, [&](int rep) {
      std::uint64_t rep_key =
          mix_keys({seed, static_cast<std::uint64_t>(ni), static_cast<std::uint64_t>(rep)});
      Dataset d = sample_dataset(law, n, rep_key);
      BootstrapOptions bopts = design.bootstrap;
      bopts.seed = mix_keys({rep_key, 0xce11ULL});
      bopts.threads = 1;
      EstimatorConfig rep_cfg = cfg;
      rep_cfg.threads = 1;
      rep_cfg.seed = mix_keys({rep_key, 0xe5717ULL});
      BootstrapRun run = run_bootstrap(d, spec, rep_cfg, design.functional, tilts, bopts);
      for (std::size_t a = 0; a < na; ++a) {
        CiResult ci = ci_from_run(run, static_cast<int>(a), design.alphas[a]);
        estimates[static_cast<std::size_t>(rep)][a] = ci.estimate;
        covered[static_cast<std::size_t>(rep)][a] =
            (ci.lower <= truth[a] && truth[a] <= ci.upper) ? 1 : 0;
      }
    });

    for (std::size_t a = 0; a < na; ++a) {
      SimulationRow row;
      row.alpha = design.alphas[a];
      row.n = n;
      row.truth = truth[a];
      row.reps = design.reps;
      double mean = 0.0;
      for (int r = 0; r < design.reps; ++r) mean += estimates[static_cast<std::size_t>(r)][a];
      mean /= static_cast<double>(design.reps);
      double ss = 0.0;
      double mse = 0.0;
      long cov = 0;
      for (int r = 0; r < design.reps; ++r) {
        double e = estimates[static_cast<std::size_t>(r)][a];
        ss += (e - mean) * (e - mean);
        mse += (e - truth[a]) * (e - truth[a]);
        cov += covered[static_cast<std::size_t>(r)][a];
      }
      row.mean = mean;
      row.sd = design.reps > 1 ? std::sqrt(ss / static_cast<double>(design.reps - 1)) : 0.0;
      row.rmse = std::sqrt(mse / static_cast<double>(design.reps));
      row.coverage = static_cast<double>(cov) / static_cast<double>(design.reps);
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace mrsens
