#include "mrsens/observed_law.hpp"

#include <cmath>

#include "mrsens/errors.hpp"

namespace mrsens {

FactorTable ObservedLaw::chain_conditional(int j) const {
  int i = j - 2 * m - 1;
  if (i < 1 || i > n_windows()) {
    throw NumericError("chain_conditional: j=" + std::to_string(j) +
                       " outside the window chain");
  }
  const FactorTable& w = window(i);
  return to_conditional(w, var_range(VarKind::ObservedO, i, j - 1));
}

void ObservedLaw::validate() const {
  if (2 * m + 1 >= K) throw NumericError("observed law: need 2m+1 < K");
  if (static_cast<int>(windows.size()) != n_windows()) {
    throw NumericError("observed law: expected " + std::to_string(n_windows()) +
                       " windows, have " + std::to_string(windows.size()));
  }
  for (int i = 1; i <= n_windows(); ++i) {
    const FactorTable& w = window(i);
    Schema expect = var_range(VarKind::ObservedO, i, i + 2 * m + 1);
    if (w.schema() != expect) {
      throw NumericError("observed law: window " + std::to_string(i) +
                         " has schema " + to_string(w.schema()) + ", expected " +
                         to_string(expect));
    }
    if (!w.all_finite_nonnegative()) {
      throw NumericError("observed law: window " + std::to_string(i) +
                         " has negative or non-finite entries");
    }
    if (!w.is_normalized(kNormTol)) {
      throw NumericError("observed law: window " + std::to_string(i) +
                         " is not normalized (mass " + std::to_string(w.sum()) + ")");
    }
    for (double v : w.values()) {
      if (v < eps_floor) {
        throw NumericError("observed law: window " + std::to_string(i) +
                           " violates the positivity floor");
      }
    }
  }
  for (int i = 1; i + 1 <= n_windows(); ++i) {
    FactorTable left = marginalize(window(i), {ovar(i)});
    FactorTable right = marginalize(window(i + 1), {ovar(i + 2 * m + 2)});
    if (l_inf_distance(left, right) > kOverlapTol) {
      throw NumericError("observed law: windows " + std::to_string(i) + " and " +
                         std::to_string(i + 1) + " disagree on their overlap");
    }
  }
}

void apply_positivity_floor(ObservedLaw& law, double eps) {
  law.eps_floor = eps;
  if (eps <= 0.0) return;
  for (auto& w : law.windows) {
    double n_cells = static_cast<double>(w.size());
    if (n_cells * eps >= 1.0) {
      throw NumericError("positivity floor too large for window size");
    }
    double scale = 1.0 - n_cells * eps;
    for (double& v : w.values()) v = scale * v + eps;
  }
}

}  // namespace mrsens
