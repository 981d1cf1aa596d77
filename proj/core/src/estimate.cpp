#include "mrsens/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mrsens/errors.hpp"
#include "mrsens/rng.hpp"

namespace mrsens {

namespace {

Schema conditional_schema(int target, const std::vector<int>& features) {
  Schema s;
  for (int f : features) s.push_back(ovar(f));
  s.push_back(ovar(target));
  return canonical_schema(s);
}

void check_columns(const Dataset& d, int target, const std::vector<int>& features) {
  auto in_range = [&](int c) { return c >= 1 && c <= d.K; };
  if (!in_range(target)) throw ConfigError("estimator: target column out of range");
  for (int f : features) {
    if (!in_range(f)) throw ConfigError("estimator: feature column out of range");
    if (f == target) throw ConfigError("estimator: target cannot be a feature");
  }
}

// Lifts each conditional row to [eps, 1] by mixing with the uniform
// distribution; a no-op when the row is already above the floor.
void floor_conditional_rows(FactorTable& t, int target, double eps) {
  int pos = t.find(ovar(target));
  std::size_t str = t.stride(pos);
  auto v = t.values();
  for (std::size_t c = 0; c < v.size(); ++c) {
    if ((c / str) % 3 != 0) continue;
    double p0 = v[c];
    double p1 = v[c + str];
    double p2 = v[c + 2 * str];
    if (p0 >= eps && p1 >= eps && p2 >= eps) continue;
    double scale = 1.0 - 3.0 * eps;
    v[c] = scale * p0 + eps;
    v[c + str] = scale * p1 + eps;
    v[c + 2 * str] = scale * p2 + eps;
  }
}

}  // namespace

EmpiricalEstimator::EmpiricalEstimator(double lambda, double eps_pos)
    : lambda_(lambda), eps_pos_(eps_pos) {
  if (!(lambda > 0.0)) throw ConfigError("empirical estimator: smoothing must be > 0");
}

FactorTable EmpiricalEstimator::fit(const Dataset& d, int target,
                                    const std::vector<int>& features) const {
  check_columns(d, target, features);
  FactorTable t{conditional_schema(target, features)};
  int tpos = t.find(ovar(target));
  std::size_t tstr = t.stride(tpos);

  // Stride of each feature column inside the table.
  std::vector<std::pair<int, std::size_t>> feat_strides;  // (0-based col, stride)
  for (int f : features) feat_strides.emplace_back(f - 1, t.stride(t.find(ovar(f))));

  for (int i = 0; i < d.n; ++i) {
    std::size_t base = 0;
    for (auto [col, str] : feat_strides) {
      base += str * static_cast<std::size_t>(d.at(i, col));
    }
    t[base + tstr * static_cast<std::size_t>(d.at(i, target - 1))] += 1.0;
  }

  auto v = t.values();
  for (std::size_t c = 0; c < v.size(); ++c) {
    if ((c / tstr) % 3 != 0) continue;
    double tot = v[c] + v[c + tstr] + v[c + 2 * tstr];
    double denom = tot + 3.0 * lambda_;
    for (int o = 0; o < 3; ++o) {
      v[c + tstr * static_cast<std::size_t>(o)] =
          (v[c + tstr * static_cast<std::size_t>(o)] + lambda_) / denom;
    }
  }
  floor_conditional_rows(t, target, eps_pos_);
  return t;
}

std::string EmpiricalEstimator::describe() const {
  std::ostringstream os;
  os << "empirical(lambda=" << lambda_ << ")";
  return os.str();
}

ForestEstimator::ForestEstimator(ForestParams params, std::uint64_t seed, int threads,
                                 double eps_pos)
    : params_(params), seed_(seed), threads_(threads), eps_pos_(eps_pos) {}

FactorTable ForestEstimator::fit(const Dataset& d, int target,
                                 const std::vector<int>& features) const {
  check_columns(d, target, features);
  if (d.n == 0) throw NumericError("forest estimator: empty dataset");
  if (features.empty()) {
    // The marginal of the first visit is estimated empirically.
    return EmpiricalEstimator(std::max(0.5, params_.leaf_smoothing), eps_pos_)
        .fit(d, target, features);
  }

  const int f_count = static_cast<int>(features.size());
  std::vector<std::int8_t> x(static_cast<std::size_t>(d.n) * f_count);
  std::vector<std::int8_t> y(static_cast<std::size_t>(d.n));
  for (int i = 0; i < d.n; ++i) {
    for (int f = 0; f < f_count; ++f) {
      x[static_cast<std::size_t>(i) * f_count + f] = d.at(i, features[static_cast<std::size_t>(f)] - 1);
    }
    y[static_cast<std::size_t>(i)] = d.at(i, target - 1);
  }

  CategoricalForest forest;
  forest.fit(x, d.n, f_count, y, params_,
             mix_keys({seed_, static_cast<std::uint64_t>(target), 0x4e57ULL}), threads_);

  FactorTable t{conditional_schema(target, features)};
  int tpos = t.find(ovar(target));
  std::size_t tstr = t.stride(tpos);
  std::vector<std::size_t> fstr;
  for (int f : features) fstr.push_back(t.stride(t.find(ovar(f))));

  std::vector<std::int8_t> assign(static_cast<std::size_t>(f_count), 0);
  for (;;) {
    std::array<double, 3> probs = forest.predict(assign);
    std::size_t base = 0;
    for (int f = 0; f < f_count; ++f) {
      base += fstr[static_cast<std::size_t>(f)] * static_cast<std::size_t>(assign[static_cast<std::size_t>(f)]);
    }
    for (int o = 0; o < 3; ++o) t[base + tstr * static_cast<std::size_t>(o)] = probs[static_cast<std::size_t>(o)];
    int p = f_count - 1;
    while (p >= 0 && assign[static_cast<std::size_t>(p)] == 2) {
      assign[static_cast<std::size_t>(p)] = 0;
      --p;
    }
    if (p < 0) break;
    ++assign[static_cast<std::size_t>(p)];
  }
  floor_conditional_rows(t, target, eps_pos_);
  return t;
}

std::string ForestEstimator::describe() const {
  std::ostringstream os;
  os << "forest(trees=" << params_.n_trees << ",max_depth=" << params_.max_depth
     << ",min_leaf=" << params_.min_leaf << ",leaf_smoothing=" << params_.leaf_smoothing
     << ",bootstrap=" << (params_.bootstrap ? 1 : 0) << ",seed=" << seed_ << ")";
  return os.str();
}

ObservedLaw build_observed_law(const Dataset& d, const ModelSpec& spec,
                               const ConditionalEstimator& est, double eps_floor) {
  spec.validate();
  if (d.K != spec.K) {
    throw ConfigError("build_observed_law: dataset has K=" + std::to_string(d.K) +
                      ", model expects K=" + std::to_string(spec.K));
  }
  const int m = spec.m;
  ObservedLaw law;
  law.K = spec.K;
  law.m = m;
  law.estimator_info = est.describe();

  auto fit_or_wrap = [&](int target, const std::vector<int>& features) {
    try {
      return est.fit(d, target, features);
    } catch (const std::exception& e) {
      throw NumericError("build_observed_law: estimator failed for O_" +
                         std::to_string(target) + ": " + e.what());
    }
  };

  // First window: full-history chain within O_1..O_{2m+2}.
  FactorTable w = fit_or_wrap(1, {});
  std::vector<int> hist{1};
  for (int j = 2; j <= 2 * m + 2; ++j) {
    w = product(w, fit_or_wrap(j, hist));
    hist.push_back(j);
  }
  w.normalize();
  law.windows.push_back(std::move(w));

  for (int i = 1; i + 1 <= spec.n_windows(); ++i) {
    int j = i + 2 * m + 2;
    std::vector<int> window_feats;
    for (int f = i + 1; f <= i + 2 * m + 1; ++f) window_feats.push_back(f);
    FactorTable next =
        product(marginalize(law.windows.back(), {ovar(i)}), fit_or_wrap(j, window_feats));
    next.normalize();
    law.windows.push_back(std::move(next));
  }

  apply_positivity_floor(law, eps_floor);
  law.validate();
  return law;
}

DiagnosticReport fit_diagnostic(const Dataset& d, const ObservedLaw& law) {
  if (d.K != law.K) throw ConfigError("fit_diagnostic: dataset/law K mismatch");
  const int K = law.K;
  const int m = law.m;
  DiagnosticReport rep;

  for (int j = 1; j <= K; ++j) {
    for (int jp = j + 1; jp <= K; ++jp) {
      FactorTable model_pair;
      if (jp - j <= 2 * m + 1) {
        int i = std::clamp(jp - 2 * m - 1, 1, law.n_windows());
        Schema drop;
        for (int t = i; t <= i + 2 * m + 1; ++t) {
          if (t != j && t != jp) drop.push_back(ovar(t));
        }
        model_pair = marginalize(law.window(i), drop);
      } else {
        // Carry f(O_j, trailing window) forward through the chain.
        FactorTable state = law.window(j);
        for (int t = j + 2 * m + 2; t <= jp; ++t) {
          state = product(state, law.chain_conditional(t));
          state = marginalize(state, {ovar(t - 2 * m - 1)});
        }
        Schema drop;
        for (const auto& v : state.schema()) {
          if (!(v == ovar(j)) && !(v == ovar(jp))) drop.push_back(v);
        }
        model_pair = marginalize(state, drop);
      }

      FactorTable empirical{Schema{ovar(j), ovar(jp)}};
      for (int i = 0; i < d.n; ++i) {
        std::size_t idx = static_cast<std::size_t>(d.at(i, j - 1)) * 3 +
                          static_cast<std::size_t>(d.at(i, jp - 1));
        empirical[idx] += 1.0;
      }
      if (d.n > 0) {
        for (double& v : empirical.values()) v /= static_cast<double>(d.n);
      }

      double diff = l_inf_distance(model_pair, empirical);
      rep.pairs.push_back({j, jp, diff});
      rep.overall_max = std::max(rep.overall_max, diff);
    }
  }
  return rep;
}

}  // namespace mrsens
