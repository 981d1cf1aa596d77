#include "mrsens/identify.hpp"

#include <cmath>

#include "mrsens/errors.hpp"

namespace mrsens {

namespace {

Schema schema_without(const Schema& s, const VariableRef& v) {
  Schema out;
  for (const auto& x : s) {
    if (!(x == v)) out.push_back(x);
  }
  return out;
}

void check_tilt(const ModelSpec& spec, const TiltSpec& tilt) {
  if (static_cast<int>(tilt.alphas.size()) != spec.K) {
    throw ConfigError("tilt: alpha vector must have length K");
  }
}

}  // namespace

FactorTable recursion_step(int k, const FactorTable& prev, const ModelSpec& spec,
                           const TiltSpec& tilt, RecursionTrace* trace, double* p_r0_out,
                           double* p_miss_y1_out) {
  const int K = spec.K;
  const int m = spec.m;
  const bool has_cond = k <= K - m - 1;

  // prev = f(Ybar^m_k, Ounder^{m+2}_{k-1}); drop O_{k+m+1} to reach the
  // single-step law f(Ybar^m_k, O_k, Ounder^m_k).
  FactorTable a = has_cond ? marginalize(prev, {ovar(k + m + 1)}) : prev;

  Schema ctx = spec.past_y(k);
  {
    Schema fo = spec.future_o(k);
    ctx.insert(ctx.end(), fo.begin(), fo.end());
  }

  FactorTable f_ctx = marginalize(a, {ovar(k)});

  // P(R_k = 0 | ctx) is the conditional mass of the missing code.
  FactorTable miss_mass = slice(a, {{ovar(k), kObservedCodeMissing}});
  FactorTable p_r0 = zip(miss_mass, f_ctx, [](double num, double den) {
    if (den <= 0.0) throw NumericError("recursion: zero context mass");
    return num / den;
  });

  // f(Y_k | R_k = 1, ctx): restrict to the observed codes, relabel as Y_k.
  FactorTable observed = observe_as_outcome(a, k);
  FactorTable y_given = to_conditional(observed, ctx);

  FactorTable mix = mixture_factor(y_given, p_r0, k, tilt);

  FactorTable mk = product(y_given, product(mix, f_ctx));
  if (has_cond) {
    FactorTable with_next = observe_as_outcome(prev, k);
    FactorTable cond =
        to_conditional(with_next, schema_without(with_next.schema(), ovar(k + m + 1)));
    if (trace) {
      trace->cond_target = k + m + 1;
      trace->cond_given = schema_without(with_next.schema(), ovar(k + m + 1));
    }
    mk = product(cond, mk);
  }
  mk.normalize();  // probability by construction; corrects <= 1e-12 drift

  if (p_r0_out || p_miss_y1_out) {
    FactorTable joint_r0 = product(p_r0, f_ctx);  // f(ctx, R_k = 0)
    double mass_r0 = joint_r0.sum();
    if (p_r0_out) *p_r0_out = mass_r0;
    if (p_miss_y1_out) {
      if (mass_r0 <= 0.0) {
        *p_miss_y1_out = std::numeric_limits<double>::quiet_NaN();
      } else {
        FactorTable f_miss =
            tilt.mode == TiltSpec::Mode::Finite
                ? tilt_missing(y_given, k, tilt.alpha(k))
                : tilt_missing_limit(y_given, k,
                                     tilt.mode == TiltSpec::Mode::MissingZero ? 0 : 1);
        FactorTable num = product(f_miss, joint_r0);
        *p_miss_y1_out = slice(num, {{yvar(k), 1}}).sum() / mass_r0;
      }
    }
  }

  if (trace) {
    trace->k = k;
    trace->result = mk.schema();
    trace->y_given = ctx;
    trace->context = ctx;
  }
  return mk;
}

FactorTable extend_step(int k, const FactorTable& prev_marginal, const ObservedLaw& law,
                        const ModelSpec& spec, ExtendTrace* trace) {
  const int K = spec.K;
  const int m = spec.m;
  if (k < 2 || k > K) throw NumericError("extend_step: k out of range");

  FactorTable base = prev_marginal;
  std::optional<int> summed;
  if (k > m + 1) {
    summed = k - m - 1;
    base = marginalize(prev_marginal, {yvar(k - m - 1)});
  }

  if (trace) {
    trace->k = k;
    trace->summed_y = summed;
    trace->cond_target.reset();
    trace->cond_given.clear();
    trace->r_ones.clear();
    trace->window_index = 0;
  }

  if (k > K - m - 1) {
    if (trace) trace->result = base.schema();
    return base;
  }

  // f(O_{k+m+1} | Ybar^m_k, Ounder^{m+1}_{k-1}, Rbar^m_k = 1) from the
  // window covering O_{max(1,k-m)}..O_{k+m+1}.
  int w = std::max(1, k - m);
  if (w > law.n_windows()) {
    throw NumericError("extend_step: window index out of range (internal)");
  }
  FactorTable t = law.window(w);
  int top = w + 2 * m + 1;
  if (top > k + m + 1) {
    t = marginalize(t, var_range(VarKind::ObservedO, k + m + 2, top));
  }
  std::vector<int> r_ones;
  for (int j = w; j <= k - 1; ++j) {
    t = observe_as_outcome(t, j);
    r_ones.push_back(j);
  }
  Schema given = schema_without(t.schema(), ovar(k + m + 1));
  FactorTable cond = to_conditional(t, given);

  if (trace) {
    trace->cond_target = k + m + 1;
    trace->cond_given = given;
    trace->r_ones = r_ones;
    trace->window_index = w;
  }

  FactorTable out = product(cond, base);
  if (trace) trace->result = out.schema();
  return out;
}

FullLawResult identify_all(const ObservedLaw& law, const ModelSpec& spec,
                           const TiltSpec& tilt, const IdentifyOptions& options) {
  spec.validate();
  check_tilt(spec, tilt);
  if (law.K != spec.K || law.m != spec.m) {
    throw ConfigError("identify: observed law built for K=" + std::to_string(law.K) +
                      ", m=" + std::to_string(law.m) + " but model has K=" +
                      std::to_string(spec.K) + ", m=" + std::to_string(spec.m));
  }

  const int K = spec.K;
  const int m = spec.m;

  FullLawResult res;
  res.spec = spec;
  res.tilt = tilt;
  res.conditionals.reserve(static_cast<std::size_t>(K));
  res.p_r0.resize(static_cast<std::size_t>(K));
  res.p_miss_y1.resize(static_cast<std::size_t>(K));

  // Base case: prev_1 = f(O_1..O_{m+2}), a marginal of the first window.
  FactorTable prev = marginalize(law.window(1), var_range(VarKind::ObservedO, m + 3, 2 * m + 2));
  FactorTable marginal;
  for (int k = 1; k <= K; ++k) {
    if (k >= 2) {
      ExtendTrace etrace;
      prev = extend_step(k, marginal, law, spec, options.observer ? &etrace : nullptr);
      if (options.observer) options.observer->on_extend(etrace);
    }
    RecursionTrace rtrace;
    double pr0 = 0.0;
    double pmiss = 0.0;
    marginal = recursion_step(k, prev, spec, tilt,
                              options.observer ? &rtrace : nullptr, &pr0, &pmiss);
    prev = FactorTable();  // release before the next window factor is built
    if (options.observer) options.observer->on_recursion(rtrace);
    res.p_r0[static_cast<std::size_t>(k - 1)] = pr0;
    res.p_miss_y1[static_cast<std::size_t>(k - 1)] = pmiss;

    FactorTable y_marg = marginalize(marginal, spec.future_o_ext(k));
    res.conditionals.push_back(to_conditional(y_marg, spec.past_y(k)));
    if (options.retain_marginals) res.marginals.push_back(marginal);
  }
  return res;
}

double joint_probability(const FullLawResult& res, const std::vector<int>& y) {
  const int K = res.spec.K;
  const int m = res.spec.m;
  if (static_cast<int>(y.size()) != K) {
    throw ConfigError("joint_probability: sequence must have length K");
  }
  double p = 1.0;
  std::vector<int> digits;
  for (int k = 1; k <= K; ++k) {
    const FactorTable& g = res.g(k);
    digits.clear();
    for (int j = std::max(1, k - m); j <= k; ++j) digits.push_back(y[static_cast<std::size_t>(j - 1)]);
    p *= g.at(digits);
  }
  return p;
}

std::vector<double> marginal_outcome_means(const FullLawResult& res) {
  const int K = res.spec.K;
  const int m = res.spec.m;
  std::vector<double> means(static_cast<std::size_t>(K));
  // state = f(Y_{max(1,k-m)} .. Y_{k-1}) rolls forward one assessment at a time.
  FactorTable state = FactorTable::unit();
  for (int k = 1; k <= K; ++k) {
    FactorTable joint = product(state, res.g(k));
    means[static_cast<std::size_t>(k - 1)] = slice(joint, {{yvar(k), 1}}).sum();
    state = joint;
    if (k - m >= 1) state = marginalize(state, {yvar(k - m)});
  }
  return means;
}

double expected_negative_count(const FullLawResult& res) {
  double total = 0.0;
  for (double v : marginal_outcome_means(res)) total += v;
  return total;
}

}  // namespace mrsens
