#include "mrsens/infer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mrsens/errors.hpp"
#include "mrsens/parallel.hpp"

namespace mrsens {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sample_sd(const std::vector<double>& xs) {
  std::size_t n = xs.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

double studentized(double num, double se) {
  if (se > 0.0) return num / se;
  return num == 0.0 ? 0.0 : kInf;
}

// Per-subject contribution of the imputed functional; the statistic is the
// mean of these across subjects.
double subject_term(const Dataset& d, int i, const FunctionalSpec& fspec, ImputeKind kind,
                    const std::vector<double>& visit_means) {
  auto prob_one = [&](int col) {  // P(Y = 1) for the imputed cell
    std::int8_t c = d.at(i, col);
    if (c == 0) return 0.0;
    if (c == 1) return 1.0;
    switch (kind) {
      case ImputeKind::Zero:
        return 0.0;
      case ImputeKind::One:
        return 1.0;
      default:
        return visit_means[static_cast<std::size_t>(col)];
    }
  };
  switch (fspec.kind) {
    case FunctionalSpec::Kind::ExpectedNegativeCount: {
      double s = 0.0;
      for (int col = 0; col < d.K; ++col) s += prob_one(col);
      return s;
    }
    case FunctionalSpec::Kind::MarginalMean:
      return prob_one(fspec.k - 1);
    default: {
      double p = 1.0;
      for (int col = 0; col < d.K; ++col) {
        double q = prob_one(col);
        p *= fspec.sequence[static_cast<std::size_t>(col)] == 1 ? q : 1.0 - q;
      }
      return p;
    }
  }
}

std::vector<double> visitwise_means(const Dataset& d) {
  std::vector<double> means(static_cast<std::size_t>(d.K), 0.0);
  for (int col = 0; col < d.K; ++col) means[static_cast<std::size_t>(col)] = d.observed_mean(col);
  return means;
}

void check_fspec(const FunctionalSpec& fspec, int K) {
  if (fspec.kind == FunctionalSpec::Kind::MarginalMean && (fspec.k < 1 || fspec.k > K)) {
    throw ConfigError("functional: marginal-mean visit out of range");
  }
  if (fspec.kind == FunctionalSpec::Kind::JointProb &&
      static_cast<int>(fspec.sequence.size()) != K) {
    throw ConfigError("functional: joint-probability sequence must have length K");
  }
}

Dataset resample_rows(const Dataset& d, Rng& rng) {
  Dataset out = Dataset::empty(d.n, d.K);
  for (int i = 0; i < d.n; ++i) {
    int src = rng.uniform_int(d.n);
    for (int k = 0; k < d.K; ++k) out.at(i, k) = d.at(src, k);
  }
  return out;
}

}  // namespace

double empirical_quantile_type1(std::vector<double> xs, double level) {
  std::size_t n = xs.size();
  if (n == 0) throw ConfigError("quantile of empty sample");
  std::size_t r = static_cast<std::size_t>(std::ceil(level * static_cast<double>(n)));
  r = std::max<std::size_t>(1, std::min(r, n));
  std::nth_element(xs.begin(), xs.begin() + (r - 1), xs.end());
  return xs[r - 1];
}

std::string FunctionalSpec::describe() const {
  switch (kind) {
    case Kind::ExpectedNegativeCount:
      return "expected-negative-count";
    case Kind::MarginalMean:
      return "marginal-mean:" + std::to_string(k);
    default: {
      std::string bits;
      for (int b : sequence) bits += static_cast<char>('0' + b);
      return "joint-prob:" + bits;
    }
  }
}

double evaluate_functional(const FullLawResult& res, const FunctionalSpec& fspec) {
  check_fspec(fspec, res.spec.K);
  switch (fspec.kind) {
    case FunctionalSpec::Kind::ExpectedNegativeCount:
      return expected_negative_count(res);
    case FunctionalSpec::Kind::MarginalMean:
      return marginal_outcome_means(res)[static_cast<std::size_t>(fspec.k - 1)];
    default:
      return joint_probability(res, fspec.sequence);
  }
}

std::unique_ptr<ConditionalEstimator> EstimatorConfig::make(std::uint64_t salt) const {
  if (kind == Kind::Empirical) {
    return std::make_unique<EmpiricalEstimator>(smoothing, eps_floor);
  }
  return std::make_unique<ForestEstimator>(forest, mix_keys({seed, salt, 0xe57ULL}),
                                           threads, eps_floor);
}

std::string EstimatorConfig::describe() const {
  return make(0)->describe();
}

ObservedLaw fit_observed_law(const Dataset& d, const ModelSpec& spec,
                             const EstimatorConfig& cfg, std::uint64_t salt) {
  auto est = cfg.make(salt);
  return build_observed_law(d, spec, *est, cfg.eps_floor);
}

double plug_in(const Dataset& d, const ModelSpec& spec, const EstimatorConfig& cfg,
               const FunctionalSpec& fspec, const TiltSpec& tilt) {
  check_fspec(fspec, spec.K);
  ObservedLaw law = fit_observed_law(d, spec, cfg);
  IdentifyOptions opts;
  opts.retain_marginals = false;
  FullLawResult res = identify_all(law, spec, tilt, opts);
  return evaluate_functional(res, fspec);
}

Dataset sample_dataset(const ObservedLaw& law, int n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("sample_dataset: n must be >= 1");
  const int K = law.K;
  const int m = law.m;
  const int head = 2 * m + 2;

  // Cumulative weights of the first window, then per-j chain conditionals.
  const FactorTable& w1 = law.window(1);
  std::vector<double> cum(w1.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < w1.size(); ++i) {
    acc += w1[i];
    cum[i] = acc;
  }
  std::vector<FactorTable> conds;
  for (int j = head + 1; j <= K; ++j) conds.push_back(law.chain_conditional(j));

  Dataset d = Dataset::empty(n, K);
  Rng rng = Rng::stream({seed, 0x5a3bULL});
  std::vector<int> digits(static_cast<std::size_t>(head));
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform01() * acc;
    std::size_t cell =
        static_cast<std::size_t>(std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
    if (cell >= w1.size()) cell = w1.size() - 1;
    w1.decode(cell, digits);
    for (int k = 0; k < head; ++k) d.at(i, k) = static_cast<std::int8_t>(digits[static_cast<std::size_t>(k)]);
    for (int j = head + 1; j <= K; ++j) {
      const FactorTable& cond = conds[static_cast<std::size_t>(j - head - 1)];
      // Features are the previous 2m+1 codes; the target is the last
      // schema variable, so its three cells are contiguous.
      std::size_t base = 0;
      for (int p = 0; p < 2 * m + 1; ++p) {
        base = base * 3 + static_cast<std::size_t>(d.at(i, j - 1 - (2 * m + 1) + p));
      }
      base *= 3;
      double w[3] = {cond[base], cond[base + 1], cond[base + 2]};
      d.at(i, j - 1) = static_cast<std::int8_t>(rng.categorical(w));
    }
  }
  return d;
}

double interpolated_se(double alpha, double se0, double se_lo, double se_hi,
                       double alpha_lo, double alpha_hi) {
  if (!(alpha_lo < 0.0) || !(alpha_hi > 0.0)) {
    throw ConfigError("interpolated_se: anchors must satisfy alpha_lo < 0 < alpha_hi");
  }
  if (se0 < 0.0 || se_lo < 0.0 || se_hi < 0.0) {
    throw ConfigError("interpolated_se: anchor SEs must be nonnegative");
  }
  if (alpha <= alpha_lo) return se_lo;
  if (alpha >= alpha_hi) return se_hi;
  if (alpha < 0.0) {
    double t = alpha / alpha_lo;  // 1 at the anchor, 0 at the benchmark
    return t * se_lo + (1.0 - t) * se0;
  }
  double t = alpha / alpha_hi;
  return t * se_hi + (1.0 - t) * se0;
}

int BootstrapOptions::min_replicates() const {
  // The t* order statistic must be interior: ceil(level*B) <= B-1.
  return static_cast<int>(std::ceil(1.0 / (1.0 - level)));
}

void BootstrapOptions::validate() const {
  if (level <= 0.0 || level >= 1.0) throw ConfigError("bootstrap: level must be in (0,1)");
  if (B < min_replicates()) {
    throw ConfigError("bootstrap: B=" + std::to_string(B) +
                      " too small for the " + std::to_string(level) +
                      " quantile; need B >= " + std::to_string(min_replicates()));
  }
  if (!(anchor_lo < 0.0) || !(anchor_hi > 0.0)) {
    throw ConfigError("bootstrap: SE anchors must satisfy lo < 0 < hi");
  }
}

double imputed_statistic(const Dataset& d, const FunctionalSpec& fspec, ImputeKind kind) {
  check_fspec(fspec, d.K);
  std::vector<double> means = visitwise_means(d);
  double s = 0.0;
  for (int i = 0; i < d.n; ++i) s += subject_term(d, i, fspec, kind, means);
  return d.n == 0 ? 0.0 : s / static_cast<double>(d.n);
}

double imputed_statistic_se(const Dataset& d, const FunctionalSpec& fspec, ImputeKind kind) {
  check_fspec(fspec, d.K);
  if (d.n < 2) return 0.0;
  std::vector<double> means = visitwise_means(d);
  std::vector<double> terms(static_cast<std::size_t>(d.n));
  for (int i = 0; i < d.n; ++i) {
    terms[static_cast<std::size_t>(i)] = subject_term(d, i, fspec, kind, means);
  }
  return sample_sd(terms) / std::sqrt(static_cast<double>(d.n));
}

BootstrapRun run_bootstrap(const Dataset& d, const ModelSpec& spec,
                           const EstimatorConfig& cfg, const FunctionalSpec& fspec,
                           const std::vector<TiltSpec>& tilts,
                           const BootstrapOptions& opts) {
  opts.validate();
  check_fspec(fspec, spec.K);
  if (tilts.empty()) throw ConfigError("bootstrap: need at least one tilt");

  BootstrapRun run;
  run.opts = opts;
  run.tilts = tilts;
  run.law = fit_observed_law(d, spec, cfg);

  IdentifyOptions iopts;
  iopts.retain_marginals = false;
  for (const auto& tilt : tilts) {
    FullLawResult res = identify_all(run.law, spec, tilt, iopts);
    run.theta_hat.push_back(evaluate_functional(res, fspec));
  }
  run.mcar_hat = imputed_statistic(d, fspec, ImputeKind::ObservedMean);

  // Replicates parallelize at this level; keep each refit single-threaded.
  EstimatorConfig rep_cfg = cfg;
  if (opts.threads > 1) rep_cfg.threads = 1;

  const int B = opts.B;
  run.theta_rep.assign(tilts.size(), std::vector<double>(static_cast<std::size_t>(B), 0.0));
  run.rep_se0.resize(static_cast<std::size_t>(B));
  run.rep_se_lo.resize(static_cast<std::size_t>(B));
  run.rep_se_hi.resize(static_cast<std::size_t>(B));
  run.mcar_rep.resize(static_cast<std::size_t>(B));
  std::vector<double> anchor0(static_cast<std::size_t>(B));
  std::vector<double> anchor_lo(static_cast<std::size_t>(B));
  std::vector<double> anchor_hi(static_cast<std::size_t>(B));

  parallel_for(B, opts.threads, [&](int b) {
    Dataset rep;
    if (opts.nonparametric) {
      Rng rng = Rng::stream({opts.seed, static_cast<std::uint64_t>(b), 0x9e9aULL});
      rep = resample_rows(d, rng);
    } else {
      rep = sample_dataset(run.law, d.n, mix_keys({opts.seed, static_cast<std::uint64_t>(b), 0xb001ULL}));
    }
    ObservedLaw rep_law =
        fit_observed_law(rep, spec, rep_cfg, mix_keys({opts.seed, static_cast<std::uint64_t>(b), 0xf17ULL}));
    IdentifyOptions ro;
    ro.retain_marginals = false;
    for (std::size_t t = 0; t < tilts.size(); ++t) {
      FullLawResult res = identify_all(rep_law, spec, tilts[t], ro);
      run.theta_rep[t][static_cast<std::size_t>(b)] = evaluate_functional(res, fspec);
    }
    anchor0[static_cast<std::size_t>(b)] = imputed_statistic(rep, fspec, ImputeKind::ObservedMean);
    anchor_lo[static_cast<std::size_t>(b)] = imputed_statistic(rep, fspec, ImputeKind::Zero);
    anchor_hi[static_cast<std::size_t>(b)] = imputed_statistic(rep, fspec, ImputeKind::One);
    run.rep_se0[static_cast<std::size_t>(b)] = imputed_statistic_se(rep, fspec, ImputeKind::ObservedMean);
    run.rep_se_lo[static_cast<std::size_t>(b)] = imputed_statistic_se(rep, fspec, ImputeKind::Zero);
    run.rep_se_hi[static_cast<std::size_t>(b)] = imputed_statistic_se(rep, fspec, ImputeKind::One);
    run.mcar_rep[static_cast<std::size_t>(b)] = anchor0[static_cast<std::size_t>(b)];
  });

  // Anchor SEs for the original data: bootstrap standard deviations of the
  // imputation statistics over the B replicates.
  run.se0 = sample_sd(anchor0);
  run.se_lo = sample_sd(anchor_lo);
  run.se_hi = sample_sd(anchor_hi);
  return run;
}

CiResult ci_from_run(const BootstrapRun& run, int tilt_index, double alpha_for_se) {
  const auto& opts = run.opts;
  const std::size_t ti = static_cast<std::size_t>(tilt_index);
  double theta = run.theta_hat[ti];
  double se = interpolated_se(alpha_for_se, run.se0, run.se_lo, run.se_hi,
                              opts.anchor_lo, opts.anchor_hi);
  const int B = opts.B;
  std::vector<double> ts(static_cast<std::size_t>(B));
  for (int b = 0; b < B; ++b) {
    double rep_se = interpolated_se(alpha_for_se, run.rep_se0[static_cast<std::size_t>(b)],
                                    run.rep_se_lo[static_cast<std::size_t>(b)],
                                    run.rep_se_hi[static_cast<std::size_t>(b)],
                                    opts.anchor_lo, opts.anchor_hi);
    ts[static_cast<std::size_t>(b)] =
        studentized(std::fabs(run.theta_rep[ti][static_cast<std::size_t>(b)] - theta), rep_se);
  }
  CiResult ci;
  ci.estimate = theta;
  ci.se = se;
  ci.B = B;
  ci.t_star = empirical_quantile_type1(std::move(ts), opts.level);
  if (!std::isfinite(ci.t_star)) {
    // Degenerate studentization (zero anchor spread with moving estimates):
    // fall back to the raw percentile of absolute deviations.
    std::vector<double> devs(static_cast<std::size_t>(B));
    for (int b = 0; b < B; ++b) {
      devs[static_cast<std::size_t>(b)] =
          std::fabs(run.theta_rep[ti][static_cast<std::size_t>(b)] - theta);
    }
    double half = empirical_quantile_type1(std::move(devs), opts.level);
    ci.t_star = se > 0.0 ? half / se : 0.0;
    ci.lower = theta - half;
    ci.upper = theta + half;
    return ci;
  }
  double half = ci.t_star * se;
  ci.lower = theta - half;
  ci.upper = theta + half;
  return ci;
}

CiResult mcar_ci(const BootstrapRun& run) {
  const auto& opts = run.opts;
  double theta = run.mcar_hat;
  double se = run.se0;
  std::vector<double> ts(run.mcar_rep.size());
  for (std::size_t b = 0; b < run.mcar_rep.size(); ++b) {
    ts[b] = studentized(std::fabs(run.mcar_rep[b] - theta), run.rep_se0[b]);
  }
  CiResult ci;
  ci.estimate = theta;
  ci.se = se;
  ci.B = opts.B;
  ci.t_star = empirical_quantile_type1(std::move(ts), opts.level);
  if (!std::isfinite(ci.t_star)) ci.t_star = 0.0;
  double half = ci.t_star * se;
  ci.lower = theta - half;
  ci.upper = theta + half;
  return ci;
}

CiResult bootstrap_ci(const Dataset& d, const ModelSpec& spec, const EstimatorConfig& cfg,
                      const FunctionalSpec& fspec, const TiltSpec& tilt,
                      const BootstrapOptions& opts) {
  BootstrapRun run = run_bootstrap(d, spec, cfg, fspec, {tilt}, opts);
  double alpha_for_se = 0.0;
  switch (tilt.mode) {
    case TiltSpec::Mode::MissingZero:
      alpha_for_se = opts.anchor_lo;
      break;
    case TiltSpec::Mode::MissingOne:
      alpha_for_se = opts.anchor_hi;
      break;
    default:
      alpha_for_se = tilt.alphas.front();
  }
  return ci_from_run(run, 0, alpha_for_se);
}

std::vector<SensitivityRow> sensitivity_grid(const Dataset& d, const ModelSpec& spec,
                                             const EstimatorConfig& cfg,
                                             const std::vector<double>& alphas,
                                             const FunctionalSpec& fspec,
                                             const BootstrapOptions& opts) {
  if (alphas.empty()) throw ConfigError("sensitivity grid: empty alpha list");
  std::vector<TiltSpec> tilts;
  for (double a : alphas) tilts.push_back(TiltSpec::constant(a, spec.K));
  // Replicate datasets do not depend on alpha, so one shared bootstrap run
  // reproduces exactly what independent per-row bootstrap_ci calls (same
  // seed) would produce.
  BootstrapRun run = run_bootstrap(d, spec, cfg, fspec, tilts, opts);
  std::vector<SensitivityRow> rows;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    SensitivityRow row;
    row.alpha = alphas[i];
    row.ci = ci_from_run(run, static_cast<int>(i), alphas[i]);
    rows.push_back(row);
  }
  return rows;
}

std::vector<ContourCell> contour_grid(const Dataset& arm_a, const Dataset& arm_b,
                                      const ModelSpec& spec, const EstimatorConfig& cfg,
                                      const std::vector<double>& alphas_a,
                                      const std::vector<double>& alphas_b,
                                      const FunctionalSpec& fspec,
                                      const BootstrapOptions& opts) {
  if (arm_a.K != arm_b.K) throw ConfigError("contour: arms must share K");
  if (alphas_a.empty() || alphas_b.empty()) throw ConfigError("contour: empty alpha grid");

  auto arm_opts = [&](std::uint64_t tag) {
    BootstrapOptions o = opts;
    o.seed = mix_keys({opts.seed, tag});
    return o;
  };
  std::vector<TiltSpec> tilts_a, tilts_b;
  for (double a : alphas_a) tilts_a.push_back(TiltSpec::constant(a, spec.K));
  for (double a : alphas_b) tilts_b.push_back(TiltSpec::constant(a, spec.K));
  BootstrapRun run_a = run_bootstrap(arm_a, spec, cfg, fspec, tilts_a, arm_opts(0xa));
  BootstrapRun run_b = run_bootstrap(arm_b, spec, cfg, fspec, tilts_b, arm_opts(0xb));

  const int B = opts.B;
  std::vector<ContourCell> cells;
  for (std::size_t ia = 0; ia < alphas_a.size(); ++ia) {
    double se_a = interpolated_se(alphas_a[ia], run_a.se0, run_a.se_lo, run_a.se_hi,
                                  opts.anchor_lo, opts.anchor_hi);
    for (std::size_t ib = 0; ib < alphas_b.size(); ++ib) {
      double se_b = interpolated_se(alphas_b[ib], run_b.se0, run_b.se_lo, run_b.se_hi,
                                    opts.anchor_lo, opts.anchor_hi);
      ContourCell cell;
      cell.alpha_a = alphas_a[ia];
      cell.alpha_b = alphas_b[ib];
      cell.difference = run_b.theta_hat[ib] - run_a.theta_hat[ia];
      cell.se = std::hypot(se_a, se_b);
      std::vector<double> ts(static_cast<std::size_t>(B));
      for (int b = 0; b < B; ++b) {
        double rep_se_a =
            interpolated_se(alphas_a[ia], run_a.rep_se0[static_cast<std::size_t>(b)],
                            run_a.rep_se_lo[static_cast<std::size_t>(b)],
                            run_a.rep_se_hi[static_cast<std::size_t>(b)], opts.anchor_lo,
                            opts.anchor_hi);
        double rep_se_b =
            interpolated_se(alphas_b[ib], run_b.rep_se0[static_cast<std::size_t>(b)],
                            run_b.rep_se_lo[static_cast<std::size_t>(b)],
                            run_b.rep_se_hi[static_cast<std::size_t>(b)], opts.anchor_lo,
                            opts.anchor_hi);
        double diff_b = run_b.theta_rep[ib][static_cast<std::size_t>(b)] -
                        run_a.theta_rep[ia][static_cast<std::size_t>(b)];
        ts[static_cast<std::size_t>(b)] =
            studentized(std::fabs(diff_b - cell.difference), std::hypot(rep_se_a, rep_se_b));
      }
      cell.t_star = empirical_quantile_type1(std::move(ts), opts.level);
      if (!std::isfinite(cell.t_star)) cell.t_star = 0.0;
      double half = cell.t_star * cell.se;
      cell.lower = cell.difference - half;
      cell.upper = cell.difference + half;
      cell.excludes_zero = cell.lower > 0.0 || cell.upper < 0.0;
      cells.push_back(cell);
    }
  }
  return cells;
}

std::vector<AlphaDiagnosticRow> alpha_diagnostic(const Dataset& d, const ModelSpec& spec,
                                                 const EstimatorConfig& cfg,
                                                 const std::vector<double>& alphas) {
  ObservedLaw law = fit_observed_law(d, spec, cfg);
  IdentifyOptions iopts;
  iopts.retain_marginals = false;
  std::vector<AlphaDiagnosticRow> rows;
  for (double a : alphas) {
    FullLawResult res = identify_all(law, spec, TiltSpec::constant(a, spec.K), iopts);
    for (int k = 1; k <= spec.K; ++k) {
      AlphaDiagnosticRow row;
      row.k = k;
      row.alpha = a;
      int n_obs = 0;
      row.p_obs = d.observed_mean(k - 1, &n_obs);
      row.p_miss = res.p_miss_y1[static_cast<std::size_t>(k - 1)];
      row.defined = n_obs > 0 && row.p_obs > 0.0 && std::isfinite(row.p_miss);
      row.percent_difference =
          row.defined ? 100.0 * (row.p_miss - row.p_obs) / row.p_obs
                      : std::numeric_limits<double>::quiet_NaN();
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace mrsens
