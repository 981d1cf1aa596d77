#include "mrsens/tilt.hpp"

#include <cmath>

#include "mrsens/errors.hpp"

namespace mrsens {

namespace {

// Table over {Y_k} with entries {1, e^alpha}.
FactorTable exp_alpha_y(int k, double alpha) {
  return FactorTable({yvar(k)}, {1.0, std::exp(alpha)});
}

void check_alpha(double alpha) {
  if (!std::isfinite(alpha)) throw NumericError("tilt: alpha must be finite");
}

}  // namespace

std::string TiltSpec::describe() const {
  switch (mode) {
    case Mode::MissingZero:
      return "missing=0";
    case Mode::MissingOne:
      return "missing=1";
    default: {
      bool constant = true;
      for (double a : alphas) constant &= (a == alphas.front());
      if (constant) return "alpha=" + std::to_string(alphas.front());
      return "alpha=vector";
    }
  }
}

FactorTable tilt_normalizer(const FactorTable& cond, int k, double alpha) {
  check_alpha(alpha);
  return marginalize(product(cond, exp_alpha_y(k, alpha)), {yvar(k)});
}

FactorTable tilt_missing(const FactorTable& cond, int k, double alpha) {
  FactorTable c = tilt_normalizer(cond, k, alpha);
  FactorTable tilted = product(cond, exp_alpha_y(k, alpha));
  return zip(tilted, c, [](double t, double cc) { return t / cc; });
}

FactorTable tilt_missing_limit(const FactorTable& cond, int k, int value) {
  FactorTable out(cond.schema());
  int pos = out.find(yvar(k));
  if (pos < 0) throw NumericError("tilt_missing_limit: Y" + std::to_string(k) + " absent");
  std::size_t stride = out.stride(pos);
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) {
    int y = static_cast<int>(i / stride) % 2;
    ov[i] = (y == value) ? 1.0 : 0.0;
  }
  return out;
}

FactorTable mixture_factor(const FactorTable& cond, const FactorTable& p_r0, int k,
                           const TiltSpec& tilt) {
  FactorTable w = FactorTable::unit();
  if (tilt.mode == TiltSpec::Mode::Finite) {
    double alpha = tilt.alpha(k);
    check_alpha(alpha);
    FactorTable c = tilt_normalizer(cond, k, alpha);
    w = zip(exp_alpha_y(k, alpha), c, [](double e, double cc) { return e / cc; });
  } else {
    // Exact imputation limit: all missing mass goes to Y_k = v, so the
    // weight is the indicator divided by the observed probability of v.
    int v = tilt.mode == TiltSpec::Mode::MissingZero ? 0 : 1;
    FactorTable indicator = tilt_missing_limit(cond, k, v);
    w = zip(indicator, cond, [](double ind, double f) {
      if (ind == 0.0) return 0.0;
      if (f <= 0.0) {
        throw NumericError("imputation limit: observed conditional has zero mass");
      }
      return 1.0 / f;
    });
  }
  FactorTable r0_term = product(p_r0, w);
  return zip(p_r0, r0_term, [](double p0, double t) { return (1.0 - p0) + t; });
}

}  // namespace mrsens
