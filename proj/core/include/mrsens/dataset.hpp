#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mrsens {

// n x K matrix of observed-data codes (0, 1, or 2 = missing).
// CSV format: header `id,visit_1,...,visit_K`; cells `0`, `1`, or `NA`
// (case-insensitive; an empty cell also reads as missing).
struct Dataset {
  int n = 0;
  int K = 0;
  std::vector<std::int8_t> cells;  // row-major, n*K codes

  std::int8_t at(int row, int col) const { return cells[static_cast<std::size_t>(row) * K + col]; }
  std::int8_t& at(int row, int col) { return cells[static_cast<std::size_t>(row) * K + col]; }

  static Dataset empty(int n_rows, int n_cols);
  static Dataset from_csv(const std::filesystem::path& path);
  void to_csv(const std::filesystem::path& path) const;

  // Fraction of ones among observed cells at column k (0-based); the count
  // of observed cells is returned through n_observed.
  double observed_mean(int col, int* n_observed = nullptr) const;
};

// Missingness-pattern summary in the layout of a pattern table:
// complete rows, monotone dropouts (a nonempty proper trailing block of
// missing visits), all-missing rows, and non-monotone rows stratified by
// how many visits are missing.
struct PatternCounts {
  int n = 0;
  int complete = 0;
  int monotone_dropout = 0;
  int all_missing = 0;
  int non_monotone_1 = 0;
  int non_monotone_2 = 0;
  int non_monotone_3 = 0;
  int non_monotone_4plus = 0;

  double pct(int count) const { return n == 0 ? 0.0 : 100.0 * count / n; }
};

PatternCounts pattern_summary(const Dataset& d);

}  // namespace mrsens
