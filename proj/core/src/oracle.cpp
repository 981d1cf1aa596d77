#include "mrsens/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "mrsens/errors.hpp"
#include "mrsens/rng.hpp"

namespace mrsens {

namespace {

double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Selection-and-determinism factor over (Ybar^m_k, Y_k, Ounder^m_k, O_k):
// P(R_k = r(o) | ctx, y) times the consistency indicator o==y when observed.
FactorTable selection_factor(const ModelSpec& spec, int k, const FactorTable& baseline) {
  Schema schema = baseline.schema();
  schema.push_back(yvar(k));
  schema.push_back(ovar(k));
  FactorTable out{canonical_schema(schema)};
  int y_pos = out.find(yvar(k));
  int o_pos = out.find(ovar(k));
  std::vector<int> digits(out.schema().size());
  std::vector<int> ctx_digits(baseline.schema().size());
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) {
    out.decode(i, digits);
    int y = digits[static_cast<std::size_t>(y_pos)];
    int o = digits[static_cast<std::size_t>(o_pos)];
    std::size_t c = 0;
    for (std::size_t p = 0; p < baseline.schema().size(); ++p) {
      int pos = out.find(baseline.schema()[p]);
      ctx_digits[p] = digits[static_cast<std::size_t>(pos)];
      c = c * static_cast<std::size_t>(alphabet_size(baseline.schema()[p])) +
          static_cast<std::size_t>(ctx_digits[p]);
    }
    double p0 = expit(baseline[c] + spec.alphas[static_cast<std::size_t>(k - 1)] * y);
    if (o == kObservedCodeMissing) {
      ov[i] = p0;
    } else {
      ov[i] = (o == y) ? 1.0 - p0 : 0.0;
    }
  }
  return out;
}

}  // namespace

FactorTable FullLawOracle::outcome_joint() const {
  FactorTable j = FactorTable::unit();
  for (const auto& g : y_conditionals) j = product(j, g);
  return j;
}

double FullLawOracle::tilt_identity_residual(double mass_floor) const {
  double worst = 0.0;
  for (int k = 1; k <= spec.K; ++k) {
    Schema keep = spec.past_y(k);
    keep.push_back(yvar(k));
    keep.push_back(ovar(k));
    {
      Schema fo = spec.future_o(k);
      keep.insert(keep.end(), fo.begin(), fo.end());
    }
    keep = canonical_schema(keep);
    Schema drop;
    for (const auto& v : joint.schema()) {
      if (std::find(keep.begin(), keep.end(), v) == keep.end()) drop.push_back(v);
    }
    FactorTable a = marginalize(joint, drop);
    int y_pos = a.find(yvar(k));
    int o_pos = a.find(ovar(k));
    std::size_t y_str = a.stride(y_pos);
    std::size_t o_str = a.stride(o_pos);
    double ea = std::exp(spec.alphas[static_cast<std::size_t>(k - 1)]);
    // Iterate context cells (all vars except Y_k, O_k).
    std::size_t n_ctx = a.size() / 6;
    std::vector<int> digits(a.schema().size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      a.decode(i, digits);
      if (digits[static_cast<std::size_t>(y_pos)] != 0 ||
          digits[static_cast<std::size_t>(o_pos)] != 0) {
        continue;  // visit each context once, at (y=0, o=0)
      }
      auto cell = [&](int y, int o) { return a[i + y_str * y + o_str * o]; };
      // Observed slice: Y determined by O for codes 0/1.
      double p1_0 = cell(0, 0);
      double p1_1 = cell(1, 1);
      double p0_0 = cell(0, 2);
      double p0_1 = cell(1, 2);
      double m1 = p1_0 + p1_1;
      double m0 = p0_0 + p0_1;
      if (m1 < mass_floor || m0 < mass_floor) continue;
      double c = (p1_0 + p1_1 * ea) / m1;
      worst = std::max(worst, std::fabs(p0_0 / m0 - (p1_0 / m1) / c));
      worst = std::max(worst, std::fabs(p0_1 / m0 - (p1_1 / m1) * ea / c));
    }
    (void)n_ctx;
  }
  return worst;
}

FullLawOracle gen_full_law(const ModelSpec& spec, std::uint64_t seed, double concentration) {
  spec.validate();
  if (spec.K > kMaxEnumK) {
    throw ConfigError("oracle: exact enumeration is capped at K=" +
                      std::to_string(kMaxEnumK) + ", got K=" + std::to_string(spec.K));
  }
  FullLawOracle o;
  o.spec = spec;
  Rng rng = Rng::stream({seed, 0x0ac1eULL});
  for (int k = 1; k <= spec.K; ++k) {
    Schema past = spec.past_y(k);
    Schema full = past;
    full.push_back(yvar(k));
    FactorTable g{canonical_schema(full)};
    std::size_t n_ctx = g.size() / 2;
    int y_pos = g.find(yvar(k));
    std::size_t y_str = g.stride(y_pos);
    for (std::size_t c = 0; c < g.size(); ++c) {
      if ((c / y_str) % 2 != 0) continue;
      double p1 = rng.beta(concentration, concentration);
      g[c] = 1.0 - p1;
      g[c + y_str] = p1;
    }
    (void)n_ctx;
    o.y_conditionals.push_back(std::move(g));

    Schema ctx = spec.past_y(k);
    {
      Schema fo = spec.future_o(k);
      ctx.insert(ctx.end(), fo.begin(), fo.end());
    }
    FactorTable b{canonical_schema(ctx)};
    for (double& v : b.values()) v = rng.uniform(-1.5, 1.5);
    o.r_baseline.push_back(std::move(b));
  }

  FactorTable joint = FactorTable::unit();
  for (int k = 1; k <= spec.K; ++k) joint = product(joint, o.y_conditional(k));
  for (int k = spec.K; k >= 1; --k) {
    joint = product(joint, selection_factor(spec, k, o.r_baseline[static_cast<std::size_t>(k - 1)]));
  }
  double drift = std::fabs(joint.sum() - 1.0);
  if (drift > 1e-12) {
    throw NumericError("oracle: joint mass drift " + std::to_string(drift));
  }
  joint.normalize();
  o.joint = std::move(joint);
  return o;
}

ObservedLaw exact_observed_law(const FullLawOracle& oracle) {
  const ModelSpec& spec = oracle.spec;
  FactorTable o_joint =
      marginalize(oracle.joint, var_range(VarKind::OutcomeY, 1, spec.K));
  ObservedLaw law;
  law.K = spec.K;
  law.m = spec.m;
  law.eps_floor = 0.0;
  law.estimator_info = "oracle-exact";
  for (int i = 1; i <= spec.n_windows(); ++i) {
    Schema drop;
    for (int j = 1; j <= spec.K; ++j) {
      if (j < i || j > i + 2 * spec.m + 1) drop.push_back(ovar(j));
    }
    FactorTable w = marginalize(o_joint, drop);
    w.normalize();
    law.windows.push_back(std::move(w));
  }
  law.validate();
  return law;
}

CiReport verify_ci(const FullLawOracle& oracle, const CiStatement& stmt, double tol) {
  ModelDag dag = build_full_dag(oracle.spec);
  const FactorTable& joint = oracle.joint;

  // Radix layout of the derived (X, Z, S) values.
  auto radix = [&](int id) {
    ModelVertex v = dag.vertex(id);
    return v.type == VertexType::ObservedOutcome ? 3 : 2;
  };
  auto group_size = [&](const std::vector<int>& ids) {
    std::size_t n = 1;
    for (int id : ids) n *= static_cast<std::size_t>(radix(id));
    return n;
  };
  std::size_t nx = group_size(stmt.x);
  std::size_t nz = group_size(stmt.z);
  std::size_t ns = group_size(stmt.s);

  std::vector<int> y_pos(static_cast<std::size_t>(oracle.spec.K) + 1);
  std::vector<int> o_pos(static_cast<std::size_t>(oracle.spec.K) + 1);
  for (int k = 1; k <= oracle.spec.K; ++k) {
    y_pos[static_cast<std::size_t>(k)] = joint.find(yvar(k));
    o_pos[static_cast<std::size_t>(k)] = joint.find(ovar(k));
  }

  std::vector<int> digits(joint.schema().size());
  auto derived = [&](int id) {
    ModelVertex v = dag.vertex(id);
    int o = v.type == VertexType::Outcome
                ? 0
                : digits[static_cast<std::size_t>(o_pos[static_cast<std::size_t>(v.index)])];
    switch (v.type) {
      case VertexType::Outcome:
        return digits[static_cast<std::size_t>(y_pos[static_cast<std::size_t>(v.index)])];
      case VertexType::Response:
        return o == kObservedCodeMissing ? 0 : 1;
      default:
        return o;  // Yobs: the code itself (2 plays the role of "?")
    }
  };
  auto code_of = [&](const std::vector<int>& ids) {
    std::size_t c = 0;
    for (int id : ids) c = c * static_cast<std::size_t>(radix(id)) +
                           static_cast<std::size_t>(derived(id));
    return c;
  };

  std::vector<double> mass(ns * nx * nz, 0.0);
  for (std::size_t i = 0; i < joint.size(); ++i) {
    double p = joint[i];
    if (p == 0.0) continue;
    joint.decode(i, digits);
    mass[(code_of(stmt.s) * nx + code_of(stmt.x)) * nz + code_of(stmt.z)] += p;
  }

  CiReport rep;
  rep.statement = stmt.describe(dag);
  constexpr double kMassFloor = 1e-9;
  for (std::size_t s = 0; s < ns; ++s) {
    double ps = 0.0;
    std::vector<double> pz_s(nz, 0.0);
    for (std::size_t x = 0; x < nx; ++x) {
      for (std::size_t z = 0; z < nz; ++z) {
        double p = mass[(s * nx + x) * nz + z];
        ps += p;
        pz_s[z] += p;
      }
    }
    if (ps < kMassFloor) continue;
    for (std::size_t x = 0; x < nx; ++x) {
      double psx = 0.0;
      for (std::size_t z = 0; z < nz; ++z) psx += mass[(s * nx + x) * nz + z];
      if (psx < kMassFloor) continue;
      ++rep.contexts_checked;
      for (std::size_t z = 0; z < nz; ++z) {
        double diff = std::fabs(mass[(s * nx + x) * nz + z] / psx - pz_s[z] / ps);
        rep.max_residual = std::max(rep.max_residual, diff);
      }
    }
  }
  rep.pass = rep.max_residual <= tol;
  return rep;
}

ObservedLaw gen_window_law(int K, int m, std::uint64_t seed) {
  ModelSpec spec = ModelSpec::constant_alpha(K, m, 0.0);
  Rng rng = Rng::stream({seed, 0x817d07ULL});
  ObservedLaw law;
  law.K = K;
  law.m = m;
  law.eps_floor = 0.0;
  law.estimator_info = "synthetic-window-chain";

  FactorTable w1{var_range(VarKind::ObservedO, 1, 2 * m + 2)};
  for (double& v : w1.values()) v = 0.05 + rng.uniform01();
  w1.normalize();
  law.windows.push_back(std::move(w1));
  for (int i = 2; i <= spec.n_windows(); ++i) {
    int j = i + 2 * m + 1;  // new rightmost variable O_j
    FactorTable cond{var_range(VarKind::ObservedO, i, j)};
    int pos = cond.find(ovar(j));
    std::size_t str = cond.stride(pos);
    for (std::size_t c = 0; c < cond.size(); ++c) {
      if ((c / str) % 3 != 0) continue;
      double a = 0.05 + rng.uniform01();
      double b = 0.05 + rng.uniform01();
      double d = 0.05 + rng.uniform01();
      double t = a + b + d;
      cond[c] = a / t;
      cond[c + str] = b / t;
      cond[c + 2 * str] = d / t;
    }
    FactorTable base = marginalize(law.windows.back(), {ovar(i - 1)});
    FactorTable w = product(base, cond);
    w.normalize();
    law.windows.push_back(std::move(w));
  }
  law.validate();
  return law;
}

}  // namespace mrsens
