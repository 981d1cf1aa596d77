#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mrsens/graph.hpp"
#include "mrsens/model.hpp"
#include "mrsens/observed_law.hpp"

namespace mrsens {

// Enumerating the joint costs ~4^K reachable cells inside a 6^K dense
// table; beyond this the exact oracle is refused.
inline constexpr int kMaxEnumK = 8;

// An exact full-data law inside the model class: outcome conditionals
// f(Y_k | Ybar^m_k), baseline missingness logits b_k over
// (Ybar^m_k, Ounder^m_k), and selection
//   P(R_k = 0 | Ybar^m_k, Y_k, Ounder^m_k) = expit(b_k + alpha_k Y_k),
// which is the selection-odds form of the exponential-tilting restriction.
// `joint` is the exact dense table over (Y_1..Y_K, O_1..O_K).
struct FullLawOracle {
  ModelSpec spec;
  std::vector<FactorTable> y_conditionals;  // k = 1..K, conditional on Ybar^m_k
  std::vector<FactorTable> r_baseline;      // logit tables over (Ybar^m_k, Ounder^m_k)
  FactorTable joint;

  const FactorTable& y_conditional(int k) const {
    return y_conditionals[static_cast<std::size_t>(k - 1)];
  }

  // The generating outcome joint f(Ybar) over (Y_1..Y_K), size 2^K.
  FactorTable outcome_joint() const;

  // Largest violation of the tilt identity
  //   f(y | R_k=0, ctx) * c_k(ctx) = f(y | R_k=1, ctx) * e^{alpha_k y}
  // over contexts with both response slices of mass >= mass_floor.
  double tilt_identity_residual(double mass_floor = 1e-9) const;
};

FullLawOracle gen_full_law(const ModelSpec& spec, std::uint64_t seed,
                           double concentration = 1.0);

// Marginalizes the oracle joint to the O-chain and its sliding windows.
// Exact; no positivity floor is applied.
ObservedLaw exact_observed_law(const FullLawOracle& oracle);

struct CiReport {
  bool pass = false;
  double max_residual = 0.0;
  long contexts_checked = 0;
  std::string statement;
};

// Numerically checks X _||_ Z | S on the enumerated joint: the maximum,
// over (x, s) assignments with mass >= 1e-9, of the L-infinity distance
// between f(Z | X=x, S=s) and f(Z | S=s).
CiReport verify_ci(const FullLawOracle& oracle, const CiStatement& stmt, double tol);

// A synthetic observed law at arbitrary scale (no enumerable full law):
// W_1 is a random positive joint and each later window extends the chain
// with a random conditional. Satisfies every ObservedLaw invariant.
ObservedLaw gen_window_law(int K, int m, std::uint64_t seed);

}  // namespace mrsens
