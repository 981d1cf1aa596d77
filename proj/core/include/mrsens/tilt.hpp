#pragma once

#include <string>
#include <vector>

#include "mrsens/factor_table.hpp"

namespace mrsens {

// How the distribution of a missing outcome relates to the observed one:
// the finite-alpha exponential tilt, or its two exact limits where a
// missing outcome is imputed as 0 or 1 (point-mass tilt). The limits are
// separate code paths, not large-alpha approximations.
struct TiltSpec {
  enum class Mode { Finite, MissingZero, MissingOne };
  Mode mode = Mode::Finite;
  std::vector<double> alphas;

  static TiltSpec constant(double alpha, int K) {
    return {Mode::Finite, std::vector<double>(static_cast<std::size_t>(K), alpha)};
  }
  static TiltSpec vector(std::vector<double> alphas) {
    return {Mode::Finite, std::move(alphas)};
  }
  static TiltSpec missing_zero(int K) {
    return {Mode::MissingZero, std::vector<double>(static_cast<std::size_t>(K), 0.0)};
  }
  static TiltSpec missing_one(int K) {
    return {Mode::MissingOne, std::vector<double>(static_cast<std::size_t>(K), 0.0)};
  }

  double alpha(int k) const { return alphas[static_cast<std::size_t>(k - 1)]; }
  std::string describe() const;
};

// c_k(ctx) = E[exp(alpha * Y_k) | R_k = 1, ctx] = f(0|ctx) + f(1|ctx) e^alpha.
// `cond` must be a conditional-on-ctx table whose only other variable is
// the binary Y_k.
FactorTable tilt_normalizer(const FactorTable& cond, int k, double alpha);

// The exponential-tilting restriction:
//   f(y | R_k=0, ctx) = f(y | R_k=1, ctx) * exp(alpha * y) / c_k(ctx).
FactorTable tilt_missing(const FactorTable& cond, int k, double alpha);

// Point-mass limit of tilt_missing as alpha -> -inf (value=0) or +inf (value=1).
FactorTable tilt_missing_limit(const FactorTable& cond, int k, int value);

// The braces factor of the identification step, over (Y_k, ctx):
//   P(R_k=1|ctx) + P(R_k=0|ctx) * w(y, ctx)
// with w = e^{alpha y}/c_k(ctx) for finite tilt, and w = 1{y=v}/f(v|ctx)
// for the imputation limits. `p_r0` is the conditional P(R_k=0 | ctx).
FactorTable mixture_factor(const FactorTable& cond, const FactorTable& p_r0, int k,
                           const TiltSpec& tilt);

}  // namespace mrsens
