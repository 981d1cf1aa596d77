#pragma once

#include <string>
#include <vector>

#include "mrsens/model.hpp"

namespace mrsens {

// Plain DAG with d-separation queries. Vertices are 0..n-1.
struct Dag {
  explicit Dag(int n_vertices)
      : n(n_vertices), parents(n_vertices), children(n_vertices) {}

  int n;
  std::vector<std::vector<int>> parents;
  std::vector<std::vector<int>> children;

  void add_edge(int from, int to);
  bool has_edge(int from, int to) const;

  // True iff every path between X and Z is blocked by S (reachability
  // formulation of the d-separation criterion).
  bool d_separated(const std::vector<int>& x, const std::vector<int>& z,
                   const std::vector<int>& s) const;

  // True iff the vertices admit a topological order (used as an
  // acyclicity certificate in tests).
  bool is_acyclic() const;
};

enum class VertexType { Outcome, Response, ObservedOutcome };

struct ModelVertex {
  VertexType type;
  int index;  // 1-based assessment index
};

enum class EdgeFlag { Plain, Deterministic, TiltSensitive };

// DAG of the m-th order Markov missingness model over
// {Y_k, R_k, Yobs_k : k = 1..K}.
struct ModelDag {
  int K = 0;
  int m = 0;
  Dag dag{0};

  static int y_id(int k) { return 3 * (k - 1); }
  static int r_id(int k) { return 3 * (k - 1) + 1; }
  static int yobs_id(int k) { return 3 * (k - 1) + 2; }

  ModelVertex vertex(int id) const;
  std::string vertex_name(int id) const;

  // The two vertices that O_k expands to: {R_k, Yobs_k}.
  std::vector<int> o_pair(int k) const { return {r_id(k), yobs_id(k)}; }

  bool is_deterministic(int id) const { return id % 3 == 2; }

  // Edge metadata mirroring the roles in the model: edges into Yobs are
  // deterministic, Y_k -> R_k carries the sensitivity parameter, the rest
  // are plain probabilistic dependences.
  EdgeFlag edge_flag(int from, int to) const;
};

ModelDag build_full_dag(const ModelSpec& spec);

struct CiStatement {
  enum class Source { Lemma1, Lemma2, Adhoc };
  std::vector<int> x;  // vertex ids
  std::vector<int> z;
  std::vector<int> s;
  Source source = Source::Adhoc;
  int k = 0;

  std::string describe(const ModelDag& dag) const;
};

// The conditional-independence statements asserted by the identification
// lemmas for the given model:
//   Lemma1 (1 < k <= K-m-1): {R_{k-m}..R_{k-1}} _||_ O_{k+m+1} | Ybar^m_k, Ounder^{m+1}_{k-1}
//   Lemma2 (1 <= k <= K-m-1): {R_k} _||_ O_{k+m+1} | Ybar^{m+1}_{k+1}, Ounder^m_k
// O-symbols are expanded to their {R, Yobs} vertex pairs; windows truncate
// at the boundaries.
std::vector<CiStatement> lemma_statements(const ModelSpec& spec,
                                          CiStatement::Source which);

}  // namespace mrsens
