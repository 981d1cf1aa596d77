#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mrsens/estimate.hpp"
#include "mrsens/identify.hpp"
#include "mrsens/rng.hpp"

namespace mrsens {

// Which functional of the outcome law is reported.
struct FunctionalSpec {
  enum class Kind { ExpectedNegativeCount, MarginalMean, JointProb };
  Kind kind = Kind::ExpectedNegativeCount;
  int k = 0;                  // MarginalMean visit (1-based)
  std::vector<int> sequence;  // JointProb target

  std::string describe() const;
};

double evaluate_functional(const FullLawResult& res, const FunctionalSpec& fspec);

// Estimator choice plus seeding; `salt` derives independent fits for
// bootstrap replicates while keeping runs reproducible.
struct EstimatorConfig {
  enum class Kind { Empirical, Forest };
  Kind kind = Kind::Empirical;
  double smoothing = 0.5;
  ForestParams forest;
  std::uint64_t seed = 0;
  int threads = 1;
  double eps_floor = kEpsPos;

  std::unique_ptr<ConditionalEstimator> make(std::uint64_t salt = 0) const;
  std::string describe() const;
};

ObservedLaw fit_observed_law(const Dataset& d, const ModelSpec& spec,
                             const EstimatorConfig& cfg, std::uint64_t salt = 0);

// Estimate the law, run the identification recursion, evaluate.
double plug_in(const Dataset& d, const ModelSpec& spec, const EstimatorConfig& cfg,
               const FunctionalSpec& fspec, const TiltSpec& tilt);

// Parametric sampling from the window chain: (O_1..O_{2m+2}) from W_1,
// then each later O_j from f(O_j | previous 2m+1 codes).
Dataset sample_dataset(const ObservedLaw& law, int n, std::uint64_t seed);

// Piecewise-linear standard-error interpolation anchored at
// SE(alpha_lo)=se_lo, SE(0)=se0, SE(alpha_hi)=se_hi; clamped outside.
double interpolated_se(double alpha, double se0, double se_lo, double se_hi,
                       double alpha_lo, double alpha_hi);

// Type-1 empirical quantile: the ceil(level * n)-th order statistic.
double empirical_quantile_type1(std::vector<double> xs, double level);

struct CiResult {
  double estimate = 0.0;
  double se = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double t_star = 0.0;
  int B = 0;
};

struct BootstrapOptions {
  int B = 1000;
  std::uint64_t seed = 0;
  double level = 0.95;       // symmetric coverage target
  double anchor_lo = -5.0;   // alpha at which SE equals the missing=0 anchor
  double anchor_hi = 5.0;
  bool nonparametric = false;  // row resampling instead of the parametric draw
  int threads = 1;

  int min_replicates() const;
  void validate() const;
};

// Reference analyses evaluated directly on a dataset (MCAR uses visitwise
// observed means; the imputation anchors feed the SE interpolation).
enum class ImputeKind { ObservedMean, Zero, One };
double imputed_statistic(const Dataset& d, const FunctionalSpec& fspec, ImputeKind kind);
// Analytic SE of that statistic (it is a mean of per-subject terms).
double imputed_statistic_se(const Dataset& d, const FunctionalSpec& fspec, ImputeKind kind);

// The alpha-independent part of a bootstrap run on one dataset: the fitted
// law, plug-in estimates for every requested tilt (original + replicates),
// anchor statistics and their spread. Replicate b is fully reproducible
// from (seed, b).
struct BootstrapRun {
  ObservedLaw law;
  std::vector<TiltSpec> tilts;
  std::vector<double> theta_hat;               // per tilt
  std::vector<std::vector<double>> theta_rep;  // [tilt][b]
  double se0 = 0.0, se_lo = 0.0, se_hi = 0.0;  // bootstrap SDs of the anchors
  std::vector<double> rep_se0, rep_se_lo, rep_se_hi;  // analytic, per replicate
  double mcar_hat = 0.0;
  std::vector<double> mcar_rep;
  BootstrapOptions opts;
};

BootstrapRun run_bootstrap(const Dataset& d, const ModelSpec& spec,
                           const EstimatorConfig& cfg, const FunctionalSpec& fspec,
                           const std::vector<TiltSpec>& tilts,
                           const BootstrapOptions& opts);

// Symmetric percentile-t interval for one tilt of a finished run.
// `alpha_for_se` positions the interpolated SE (the imputation limits pin
// it at the corresponding anchor).
CiResult ci_from_run(const BootstrapRun& run, int tilt_index, double alpha_for_se);

CiResult mcar_ci(const BootstrapRun& run);

// Convenience wrapper: one dataset, one tilt.
CiResult bootstrap_ci(const Dataset& d, const ModelSpec& spec, const EstimatorConfig& cfg,
                      const FunctionalSpec& fspec, const TiltSpec& tilt,
                      const BootstrapOptions& opts);

struct SensitivityRow {
  double alpha = 0.0;
  CiResult ci;
  std::string error;  // per-row failure, other rows still produced
};

std::vector<SensitivityRow> sensitivity_grid(const Dataset& d, const ModelSpec& spec,
                                             const EstimatorConfig& cfg,
                                             const std::vector<double>& alphas,
                                             const FunctionalSpec& fspec,
                                             const BootstrapOptions& opts);

struct ContourCell {
  double alpha_a = 0.0;
  double alpha_b = 0.0;
  double difference = 0.0;
  double se = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double t_star = 0.0;
  bool excludes_zero = false;
};

// difference = estimate(armB, alpha_b) - estimate(armA, alpha_a), with
// independent per-arm bootstraps combined pairwise.
std::vector<ContourCell> contour_grid(const Dataset& arm_a, const Dataset& arm_b,
                                      const ModelSpec& spec, const EstimatorConfig& cfg,
                                      const std::vector<double>& alphas_a,
                                      const std::vector<double>& alphas_b,
                                      const FunctionalSpec& fspec,
                                      const BootstrapOptions& opts);

struct AlphaDiagnosticRow {
  int k = 0;
  double alpha = 0.0;
  double p_miss = 0.0;     // P(Y_k=1 | R_k=0) under the identified law
  double p_obs = 0.0;      // observed proportion of ones at visit k
  double percent_difference = 0.0;
  bool defined = true;
};

// The marginal-difference diagnostic: per (k, alpha), the percent
// difference between the identified missing-visit success probability and
// the observed proportion among providers.
std::vector<AlphaDiagnosticRow> alpha_diagnostic(const Dataset& d, const ModelSpec& spec,
                                                 const EstimatorConfig& cfg,
                                                 const std::vector<double>& alphas);

}  // namespace mrsens
