#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mrsens/dataset.hpp"
#include "mrsens/forest.hpp"
#include "mrsens/model.hpp"
#include "mrsens/observed_law.hpp"

namespace mrsens {

// Fits the conditional law of one observed-data code given others.
// Columns are 1-based visit indices. The returned table is over
// features + {O_target}, conditional on the features, with every
// probability in [eps_pos, 1].
class ConditionalEstimator {
 public:
  virtual ~ConditionalEstimator() = default;
  virtual FactorTable fit(const Dataset& d, int target,
                          const std::vector<int>& features) const = 0;
  virtual std::string describe() const = 0;
};

// Smoothed empirical conditional:
//   (count(F=f, O=o) + lambda) / (count(F=f) + 3*lambda), lambda > 0.
class EmpiricalEstimator : public ConditionalEstimator {
 public:
  explicit EmpiricalEstimator(double lambda = 0.5, double eps_pos = kEpsPos);
  FactorTable fit(const Dataset& d, int target,
                  const std::vector<int>& features) const override;
  std::string describe() const override;

 private:
  double lambda_;
  double eps_pos_;
};

// Random-forest conditional: per feature assignment, the average of the
// per-tree smoothed leaf class proportions, materialized over all 3^|F|
// assignments. The empty-feature case degrades to the smoothed marginal.
class ForestEstimator : public ConditionalEstimator {
 public:
  ForestEstimator(ForestParams params, std::uint64_t seed, int threads = 1,
                  double eps_pos = kEpsPos);
  FactorTable fit(const Dataset& d, int target,
                  const std::vector<int>& features) const override;
  std::string describe() const override;

 private:
  ForestParams params_;
  std::uint64_t seed_;
  int threads_;
  double eps_pos_;
};

// Sequential sliding-window construction of the observed-data law:
//   W_1    = f(O_1) * prod_{j=2}^{2m+2} fhat(O_j | O_1..O_{j-1})
//   W_{i+1} = marg(W_i, {O_i}) * fhat(O_{i+2m+2} | O_{i+1}..O_{i+2m+1})
// then every window gets the uniform-mixture positivity floor.
ObservedLaw build_observed_law(const Dataset& d, const ModelSpec& spec,
                               const ConditionalEstimator& est,
                               double eps_floor = kEpsPos);

// Pairwise model-fit diagnostic: for every pair of visits, the max
// absolute difference between the model-based and empirical 3x3 cell
// probabilities of (O_j, O_j'). Pairs beyond one window apart use forward
// propagation through the chain conditionals.
struct DiagnosticReport {
  struct Pair {
    int j = 0;
    int j_prime = 0;
    double max_abs_diff = 0.0;
  };
  std::vector<Pair> pairs;
  double overall_max = 0.0;
};

DiagnosticReport fit_diagnostic(const Dataset& d, const ObservedLaw& law);

}  // namespace mrsens
