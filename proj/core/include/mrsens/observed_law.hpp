#pragma once

#include <string>
#include <vector>

#include "mrsens/factor_table.hpp"
#include "mrsens/model.hpp"

namespace mrsens {

inline constexpr double kEpsPos = 1e-6;       // positivity floor for estimated laws
inline constexpr double kOverlapTol = 1e-10;  // window overlap consistency
inline constexpr double kNormTol = 1e-12;

// The estimated (or exact) observed-data law: a chain of K-2m-1 sliding
// window joints W_i = f(O_i, ..., O_{i+2m+1}), mutually consistent on
// overlaps. This is the identified input to the recursion; total storage
// is 3^{2m+2} * (K - 2m - 1) entries.
struct ObservedLaw {
  int K = 0;
  int m = 0;
  double eps_floor = 0.0;        // guaranteed lower bound on window entries
  std::string estimator_info;    // provenance echo for serialization
  std::vector<FactorTable> windows;

  int n_windows() const { return K - 2 * m - 1; }
  int window_len() const { return 2 * m + 2; }

  // W_i over (O_i, ..., O_{i+2m+1}); i is 1-based.
  const FactorTable& window(int i) const { return windows[static_cast<std::size_t>(i - 1)]; }

  // f(O_j | O_{j-2m-1}, ..., O_{j-1}) derived from window W_{j-2m-1},
  // for j in [2m+3, K]. This is the chain conditional used for sampling
  // and for forward propagation beyond a single window.
  FactorTable chain_conditional(int j) const;

  // Throws NumericError when any invariant fails: window count/schemas,
  // normalization, positivity (>= eps_floor), overlap consistency.
  void validate() const;
};

// Lifts every window by a uniform mixture so each entry is >= eps while
// keeping windows normalized and exactly overlap-consistent:
//   W' = (1 - N*eps) * W + eps  (N = cells per window).
void apply_positivity_floor(ObservedLaw& law, double eps);

}  // namespace mrsens
