#include "mrsens/graph.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <stdexcept>

#include "mrsens/errors.hpp"

namespace mrsens {

void Dag::add_edge(int from, int to) {
  parents[to].push_back(from);
  children[from].push_back(to);
}

bool Dag::has_edge(int from, int to) const {
  return std::find(children[from].begin(), children[from].end(), to) !=
         children[from].end();
}

bool Dag::is_acyclic() const {
  std::vector<int> indeg(n, 0);
  for (int v = 0; v < n; ++v) indeg[v] = static_cast<int>(parents[v].size());
  std::deque<int> ready;
  for (int v = 0; v < n; ++v) {
    if (indeg[v] == 0) ready.push_back(v);
  }
  int seen = 0;
  while (!ready.empty()) {
    int v = ready.front();
    ready.pop_front();
    ++seen;
    for (int c : children[v]) {
      if (--indeg[c] == 0) ready.push_back(c);
    }
  }
  return seen == n;
}

bool Dag::d_separated(const std::vector<int>& x, const std::vector<int>& z,
                      const std::vector<int>& s) const {
  auto check = [&](const std::vector<int>& ids) {
    for (int v : ids) {
      if (v < 0 || v >= n) throw ConfigError("d_separated: unknown vertex id");
    }
  };
  check(x);
  check(z);
  check(s);

  std::vector<char> in_s(n, 0), in_z(n, 0), in_anc(n, 0);
  for (int v : s) in_s[v] = 1;
  for (int v : z) in_z[v] = 1;

  // Ancestors of S (including S itself).
  std::deque<int> stack(s.begin(), s.end());
  for (int v : s) in_anc[v] = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int p : parents[v]) {
      if (!in_anc[p]) {
        in_anc[p] = 1;
        stack.push_back(p);
      }
    }
  }

  // Reachability walk over (vertex, direction) pairs. Direction 0: entered
  // moving toward parents; 1: entered moving toward children.
  enum { kUp = 0, kDown = 1 };
  std::vector<std::array<char, 2>> visited(n, {0, 0});
  std::deque<std::pair<int, int>> queue;
  for (int v : x) queue.emplace_back(v, kUp);
  while (!queue.empty()) {
    auto [v, dir] = queue.front();
    queue.pop_front();
    if (visited[v][dir]) continue;
    visited[v][dir] = 1;
    if (!in_s[v] && in_z[v]) return false;
    if (dir == kUp && !in_s[v]) {
      for (int p : parents[v]) queue.emplace_back(p, kUp);
      for (int c : children[v]) queue.emplace_back(c, kDown);
    } else if (dir == kDown) {
      if (!in_s[v]) {
        for (int c : children[v]) queue.emplace_back(c, kDown);
      }
      if (in_anc[v]) {
        for (int p : parents[v]) queue.emplace_back(p, kUp);
      }
    }
  }
  return true;
}

ModelVertex ModelDag::vertex(int id) const {
  int k = id / 3 + 1;
  switch (id % 3) {
    case 0:
      return {VertexType::Outcome, k};
    case 1:
      return {VertexType::Response, k};
    default:
      return {VertexType::ObservedOutcome, k};
  }
}

std::string ModelDag::vertex_name(int id) const {
  ModelVertex v = vertex(id);
  switch (v.type) {
    case VertexType::Outcome:
      return "Y" + std::to_string(v.index);
    case VertexType::Response:
      return "R" + std::to_string(v.index);
    default:
      return "Yobs" + std::to_string(v.index);
  }
}

EdgeFlag ModelDag::edge_flag(int from, int to) const {
  if (is_deterministic(to)) return EdgeFlag::Deterministic;
  ModelVertex f = vertex(from);
  ModelVertex t = vertex(to);
  if (f.type == VertexType::Outcome && t.type == VertexType::Response &&
      f.index == t.index) {
    return EdgeFlag::TiltSensitive;
  }
  return EdgeFlag::Plain;
}

ModelDag build_full_dag(const ModelSpec& spec) {
  spec.validate();
  ModelDag g;
  g.K = spec.K;
  g.m = spec.m;
  g.dag = Dag(3 * spec.K);
  for (int k = 1; k <= spec.K; ++k) {
    // parents(Y_k) = Ybar^m_k
    for (int j = std::max(1, k - spec.m); j <= k - 1; ++j) {
      g.dag.add_edge(ModelDag::y_id(j), ModelDag::y_id(k));
    }
    // parents(R_k) = Ybar^m_k + {Y_k} + Ounder^m_k (O_j -> {R_j, Yobs_j})
    for (int j = std::max(1, k - spec.m); j <= k; ++j) {
      g.dag.add_edge(ModelDag::y_id(j), ModelDag::r_id(k));
    }
    for (int j = k + 1; j <= std::min(k + spec.m, spec.K); ++j) {
      g.dag.add_edge(ModelDag::r_id(j), ModelDag::r_id(k));
      g.dag.add_edge(ModelDag::yobs_id(j), ModelDag::r_id(k));
    }
    // parents(Yobs_k) = {R_k, Y_k}
    g.dag.add_edge(ModelDag::r_id(k), ModelDag::yobs_id(k));
    g.dag.add_edge(ModelDag::y_id(k), ModelDag::yobs_id(k));
  }
  return g;
}

std::string CiStatement::describe(const ModelDag& dag) const {
  auto names = [&](const std::vector<int>& ids) {
    std::string out = "{";
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (i) out += ",";
      out += dag.vertex_name(ids[i]);
    }
    return out + "}";
  };
  std::string src = source == Source::Lemma1   ? "Lemma1"
                    : source == Source::Lemma2 ? "Lemma2"
                                               : "adhoc";
  return src + "[k=" + std::to_string(k) + "]: " + names(x) + " _||_ " + names(z) +
         " | " + names(s);
}

std::vector<CiStatement> lemma_statements(const ModelSpec& spec,
                                          CiStatement::Source which) {
  spec.validate();
  std::vector<CiStatement> out;
  const int K = spec.K;
  const int m = spec.m;
  auto add_o_pair = [&](std::vector<int>& ids, int j) {
    ids.push_back(ModelDag::r_id(j));
    ids.push_back(ModelDag::yobs_id(j));
  };
  if (which == CiStatement::Source::Lemma1) {
    for (int k = 2; k <= K - m - 1; ++k) {
      CiStatement st;
      st.source = which;
      st.k = k;
      for (int j = std::max(1, k - m); j <= k - 1; ++j) st.x.push_back(ModelDag::r_id(j));
      add_o_pair(st.z, k + m + 1);
      for (int j = std::max(1, k - m); j <= k - 1; ++j) st.s.push_back(ModelDag::y_id(j));
      for (int j = k; j <= std::min(k + m, K); ++j) add_o_pair(st.s, j);
      out.push_back(std::move(st));
    }
  } else if (which == CiStatement::Source::Lemma2) {
    for (int k = 1; k <= K - m - 1; ++k) {
      CiStatement st;
      st.source = which;
      st.k = k;
      st.x.push_back(ModelDag::r_id(k));
      add_o_pair(st.z, k + m + 1);
      for (int j = std::max(1, k - m); j <= k; ++j) st.s.push_back(ModelDag::y_id(j));
      for (int j = k + 1; j <= std::min(k + m, K); ++j) add_o_pair(st.s, j);
      out.push_back(std::move(st));
    }
  }
  return out;
}

}  // namespace mrsens
