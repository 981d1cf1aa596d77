#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mrsens/errors.hpp"
#include "mrsens/variable.hpp"

namespace mrsens {

// K assessments, Markov order m, sensitivity parameters alpha_1..alpha_K.
// Tractability requires 2m+1 < K.
struct ModelSpec {
  int K = 0;
  int m = 0;
  std::vector<double> alphas;

  static ModelSpec constant_alpha(int K, int m, double alpha) {
    ModelSpec s;
    s.K = K;
    s.m = m;
    s.alphas.assign(static_cast<std::size_t>(K), alpha);
    s.validate();
    return s;
  }

  void validate() const {
    if (K < 2) throw ConfigError("model: K must be >= 2, got " + std::to_string(K));
    if (m < 0) throw ConfigError("model: m must be >= 0, got " + std::to_string(m));
    if (2 * m + 1 >= K) {
      throw ConfigError("model: need 2m+1 < K, got m=" + std::to_string(m) +
                        ", K=" + std::to_string(K));
    }
    if (static_cast<int>(alphas.size()) != K) {
      throw ConfigError("model: alphas must have length K");
    }
    for (double a : alphas) {
      if (!std::isfinite(a)) throw ConfigError("model: alphas must be finite");
    }
  }

  int n_windows() const { return K - 2 * m - 1; }
  int window_len() const { return 2 * m + 2; }

  // The m outcomes before k: Y_{max(1,k-m)} .. Y_{k-1}.
  Schema past_y(int k) const { return var_range(VarKind::OutcomeY, std::max(1, k - m), k - 1); }
  // Same window including Y_k itself.
  Schema past_y_incl(int k) const {
    return var_range(VarKind::OutcomeY, std::max(1, k - m), k);
  }
  // The m observed codes after k: O_{k+1} .. O_{min(k+m,K)}.
  Schema future_o(int k) const {
    return var_range(VarKind::ObservedO, k + 1, std::min(k + m, K));
  }
  // One step further: O_{k+1} .. O_{min(k+m+1,K)}.
  Schema future_o_ext(int k) const {
    return var_range(VarKind::ObservedO, k + 1, std::min(k + m + 1, K));
  }
};

}  // namespace mrsens
