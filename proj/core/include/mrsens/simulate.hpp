#pragma once

#include <vector>

#include "mrsens/infer.hpp"
#include "mrsens/observed_law.hpp"

namespace mrsens {

struct SimulationDesign {
  std::vector<double> alphas;  // common sensitivity parameter values
  std::vector<int> sample_sizes;
  int reps = 500;
  BootstrapOptions bootstrap;
  FunctionalSpec functional;
  int threads = 1;
};

struct SimulationRow {
  double alpha = 0.0;
  int n = 0;
  double truth = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  double rmse = 0.0;
  double coverage = 0.0;
  int reps = 0;
};

// Monte Carlo study of the plug-in + bootstrap pipeline against a known
// observed-data law: truth per alpha via the identification recursion on
// the exact law; per replication, a sampled dataset is refit and its CI
// checked against the truth.
std::vector<SimulationRow> run_simulation(const ObservedLaw& law, const ModelSpec& spec,
                                          const EstimatorConfig& cfg,
                                          const SimulationDesign& design,
                                          std::uint64_t seed);

}  // namespace mrsens
