#pragma once

#include <optional>
#include <vector>

#include "mrsens/model.hpp"
#include "mrsens/observed_law.hpp"
#include "mrsens/tilt.hpp"

namespace mrsens {

// Structural record of one application of the identification step:
// which factors were formed and from what. Frozen-trace tests compare
// these against the worked K=7, m=2 example.
struct RecursionTrace {
  int k = 0;
  Schema result;                  // schema of M_k
  std::optional<int> cond_target; // O_{k+m+1} when k <= K-m-1
  Schema cond_given;              // conditioning schema of that factor
  Schema y_given;                 // conditioning schema of f(Y_k | R_k=1, ctx)
  Schema context;                 // ctx = (Ybar^m_k, Ounder^m_k)
};

struct ExtendTrace {
  int k = 0;
  Schema result;                   // schema of f(Ybar^m_k, Ounder^{m+2}_{k-1})
  std::optional<int> summed_y;     // Y_{k-m-1} marginalized out of M_{k-1}
  std::optional<int> cond_target;  // O_{k+m+1} when k <= K-m-1
  Schema cond_given;
  std::vector<int> r_ones;         // indices j with R_j = 1 in that conditional
  int window_index = 0;            // source window W_i (0 when no factor)
};

class IdentifyObserver {
 public:
  virtual ~IdentifyObserver() = default;
  virtual void on_extend(const ExtendTrace&) {}
  virtual void on_recursion(const RecursionTrace&) {}
};

struct IdentifyOptions {
  // Keep the K marginal tables M_k in the result. Disable at scale: the
  // recursion itself then runs within a 2*3^{2m+2}-entry working set on
  // top of the observed law.
  bool retain_marginals = true;
  IdentifyObserver* observer = nullptr;
};

// The identified full-outcome law: conditionals g_k = f(Y_k | Ybar^m_k)
// (always present) and the marginals M_k = f(Ybar^{m+1}_{k+1}, Ounder^{m+1}_k)
// (present unless retain_marginals was off). The per-k scalars capture what
// the missing-response diagnostic needs without retaining tables.
struct FullLawResult {
  ModelSpec spec;
  TiltSpec tilt;
  std::vector<FactorTable> conditionals;  // g_1..g_K
  std::vector<FactorTable> marginals;     // M_1..M_K, maybe empty
  std::vector<double> p_r0;               // P(R_k = 0) under the identified law
  std::vector<double> p_miss_y1;          // P(Y_k = 1 | R_k = 0), NaN when P(R_k=0)=0

  const FactorTable& g(int k) const { return conditionals[static_cast<std::size_t>(k - 1)]; }
};

// One application of the inductive identification equation: consumes
// prev = f(Ybar^m_k, Ounder^{m+2}_{k-1}) and produces
// M_k = f(Ybar^{m+1}_{k+1}, Ounder^{m+1}_k).
FactorTable recursion_step(int k, const FactorTable& prev, const ModelSpec& spec,
                           const TiltSpec& tilt, RecursionTrace* trace = nullptr,
                           double* p_r0 = nullptr, double* p_miss_y1 = nullptr);

// The bridging equation: consumes M_{k-1} and the observed law and produces
// the next prev = f(Ybar^m_k, Ounder^{m+2}_{k-1}), for k >= 2.
FactorTable extend_step(int k, const FactorTable& prev_marginal, const ObservedLaw& law,
                        const ModelSpec& spec, ExtendTrace* trace = nullptr);

// Runs the base case and then alternates extend/recursion for k = 2..K;
// g_k is the Y-part of M_k conditioned on its past window.
FullLawResult identify_all(const ObservedLaw& law, const ModelSpec& spec,
                           const TiltSpec& tilt, const IdentifyOptions& options = {});

// P(Ybar = y) = prod_k g_k(y_k | window), evaluated along the sequence.
double joint_probability(const FullLawResult& res, const std::vector<int>& y);

// E[Y_k] for every k via forward propagation of the trailing m-window
// distribution (state space 2^m; never enumerates 2^K sequences).
std::vector<double> marginal_outcome_means(const FullLawResult& res);

// E[sum_k Y_k].
double expected_negative_count(const FullLawResult& res);

}  // namespace mrsens
