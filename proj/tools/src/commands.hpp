#pragma once

#include <cstdint>
#include <string>

namespace mrsens::cli {

// Everything a run needs; the manifest serializes exactly this so a run
// can be replayed bit-for-bit.
struct RunConfig {
  std::string command;
  std::string input;
  std::string input_b;
  std::string law_file;
  int k = 0;  // optional; cross-checked against the CSV header when given
  int m = 1;
  std::string alpha = "0";       // scalar, comma vector, or mcar|missing0|missing1
  std::string alpha_grid;        // lo:hi:step
  std::string alpha_grid_b;      // contour arm B (defaults to alpha_grid)
  std::string functional = "count";  // count | mean:<k> | joint:<bits>
  std::string estimator = "empirical";
  int trees = 1000;
  int max_depth = 12;
  int min_leaf = 5;
  double smoothing = 0.5;
  int bootstrap_b = 1000;
  std::string bootstrap_kind = "parametric";
  std::uint64_t seed = 1;
  std::string out = ".";
  std::string format = "csv";  // csv | json
  std::string n_list = "250,500";
  int reps = 100;
  int check_seeds = 3;
  double anchor_lo = -5.0;
  double anchor_hi = 5.0;
  double level = 0.95;
  int threads = 0;  // 0 = hardware default
};

// Executes one configured run, writing artifacts plus manifest.json under
// cfg.out. Throws ConfigError / IoError / NumericError on failure.
void run(const RunConfig& cfg);

// Reads a manifest written by `run` and re-executes it.
void replay(const std::string& manifest_path);

}  // namespace mrsens::cli
