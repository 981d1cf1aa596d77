#include "mrsens/forest.hpp"

#include <algorithm>
#include <cmath>

#include "mrsens/errors.hpp"
#include "mrsens/parallel.hpp"
#include "mrsens/rng.hpp"

namespace mrsens {

namespace {

double gini(const std::array<long, 3>& counts, long total) {
  if (total == 0) return 0.0;
  double g = 1.0;
  for (long c : counts) {
    double p = static_cast<double>(c) / static_cast<double>(total);
    g -= p * p;
  }
  return g;
}

}  // namespace

CategoricalForest::Tree CategoricalForest::build_tree(
    std::span<const std::int8_t> features, int n, int f_count,
    std::span<const std::int8_t> labels, const ForestParams& params,
    std::uint64_t tree_seed) {
  Rng rng(tree_seed);
  std::vector<int> idx(static_cast<std::size_t>(n));
  if (params.bootstrap) {
    for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = rng.uniform_int(n);
  } else {
    for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  }

  auto feat = [&](int row, int f) {
    return features[static_cast<std::size_t>(row) * static_cast<std::size_t>(f_count) + static_cast<std::size_t>(f)];
  };

  int mtry = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(f_count)))));
  Tree tree;

  std::vector<int> feature_pool(static_cast<std::size_t>(f_count));
  for (int f = 0; f < f_count; ++f) feature_pool[static_cast<std::size_t>(f)] = f;

  // Iterative construction; work items carry [lo, hi) ranges of idx.
  struct Item {
    int lo, hi, depth, slot;
  };
  std::vector<Item> stack;
  tree.push_back(Node{});
  stack.push_back({0, n, 0, 0});

  while (!stack.empty()) {
    Item it = stack.back();
    stack.pop_back();
    long total = it.hi - it.lo;
    std::array<long, 3> counts{0, 0, 0};
    for (int i = it.lo; i < it.hi; ++i) {
      ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])])];
    }

    auto make_leaf = [&] {
      Node& nd = tree[static_cast<std::size_t>(it.slot)];
      nd.feature = -1;
      double lam = params.leaf_smoothing;
      double denom = static_cast<double>(total) + 3.0 * lam;
      for (int c = 0; c < 3; ++c) {
        nd.probs[static_cast<std::size_t>(c)] =
            (static_cast<double>(counts[static_cast<std::size_t>(c)]) + lam) / denom;
      }
    };

    bool pure = counts[0] == total || counts[1] == total || counts[2] == total;
    if (it.depth >= params.max_depth || total < 2 * params.min_leaf || pure) {
      make_leaf();
      continue;
    }

    // Partial Fisher-Yates draw of mtry candidate features.
    for (int t = 0; t < mtry; ++t) {
      int r = t + rng.uniform_int(f_count - t);
      std::swap(feature_pool[static_cast<std::size_t>(t)], feature_pool[static_cast<std::size_t>(r)]);
    }

    double parent = gini(counts, total);
    double best_gain = 1e-12;
    int best_f = -1;
    std::int8_t best_v = 0;
    for (int t = 0; t < mtry; ++t) {
      int f = feature_pool[static_cast<std::size_t>(t)];
      std::array<std::array<long, 3>, 3> by_value{};  // [feature value][class]
      for (int i = it.lo; i < it.hi; ++i) {
        int row = idx[static_cast<std::size_t>(i)];
        ++by_value[static_cast<std::size_t>(feat(row, f))][static_cast<std::size_t>(labels[static_cast<std::size_t>(row)])];
      }
      for (int v = 0; v < 3; ++v) {
        std::array<long, 3> left = by_value[static_cast<std::size_t>(v)];
        long nl = left[0] + left[1] + left[2];
        long nr = total - nl;
        if (nl < params.min_leaf || nr < params.min_leaf) continue;
        std::array<long, 3> right{counts[0] - left[0], counts[1] - left[1],
                                  counts[2] - left[2]};
        double child = (static_cast<double>(nl) * gini(left, nl) +
                        static_cast<double>(nr) * gini(right, nr)) /
                       static_cast<double>(total);
        double gain = parent - child;
        if (gain > best_gain) {
          best_gain = gain;
          best_f = f;
          best_v = static_cast<std::int8_t>(v);
        }
      }
    }

    if (best_f < 0) {
      make_leaf();
      continue;
    }

    int mid = it.lo;
    for (int i = it.lo; i < it.hi; ++i) {
      if (feat(idx[static_cast<std::size_t>(i)], best_f) == best_v) {
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(mid)]);
        ++mid;
      }
    }

    int match_slot = static_cast<int>(tree.size());
    tree.push_back(Node{});
    int rest_slot = static_cast<int>(tree.size());
    tree.push_back(Node{});
    Node& nd = tree[static_cast<std::size_t>(it.slot)];
    nd.feature = best_f;
    nd.value = best_v;
    nd.match = match_slot;
    nd.rest = rest_slot;
    stack.push_back({it.lo, mid, it.depth + 1, match_slot});
    stack.push_back({mid, it.hi, it.depth + 1, rest_slot});
  }
  return tree;
}

void CategoricalForest::fit(std::span<const std::int8_t> features, int n, int f_count,
                            std::span<const std::int8_t> labels,
                            const ForestParams& params, std::uint64_t seed,
                            int threads) {
  if (n <= 0) throw NumericError("forest: empty training set");
  if (params.n_trees < 1) throw ConfigError("forest: n_trees must be >= 1");
  if (f_count < 1) throw ConfigError("forest: need at least one feature");
  trees_.assign(static_cast<std::size_t>(params.n_trees), Tree{});
  parallel_for(params.n_trees, threads, [&](int t) {
    trees_[static_cast<std::size_t>(t)] =
        build_tree(features, n, f_count, labels, params,
                   mix_keys({seed, static_cast<std::uint64_t>(t), 0xf07e57ULL}));
  });
}

std::array<double, 3> CategoricalForest::predict(std::span<const std::int8_t> x) const {
  std::array<double, 3> acc{0.0, 0.0, 0.0};
  for (const Tree& tree : trees_) {
    int cur = 0;
    while (tree[static_cast<std::size_t>(cur)].feature >= 0) {
      const Node& nd = tree[static_cast<std::size_t>(cur)];
      cur = (x[static_cast<std::size_t>(nd.feature)] == nd.value) ? nd.match : nd.rest;
    }
    const auto& p = tree[static_cast<std::size_t>(cur)].probs;
    for (int c = 0; c < 3; ++c) acc[static_cast<std::size_t>(c)] += p[static_cast<std::size_t>(c)];
  }
  for (double& v : acc) v /= static_cast<double>(trees_.size());
  return acc;
}

}  // namespace mrsens
