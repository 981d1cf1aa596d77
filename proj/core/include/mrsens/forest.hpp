#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace mrsens {

struct ForestParams {
  int n_trees = 1000;
  int max_depth = 12;
  int min_leaf = 5;
  double leaf_smoothing = 0.5;  // Laplace smoothing of leaf class proportions
  bool bootstrap = true;        // row resampling per tree
};

// Random forest over ternary categorical features and a ternary label,
// built from scratch: Gini splits of the form x[f] == v, ceil(sqrt(F))
// features examined per split, bootstrap row resampling per tree.
// Deterministic given (data, params, seed).
class CategoricalForest {
 public:
  // features: row-major n x F ternary codes.
  void fit(std::span<const std::int8_t> features, int n, int f_count,
           std::span<const std::int8_t> labels, const ForestParams& params,
           std::uint64_t seed, int threads = 1);

  // Average of per-tree (smoothed) leaf class proportions at x.
  std::array<double, 3> predict(std::span<const std::int8_t> x) const;

  int tree_count() const { return static_cast<int>(trees_.size()); }

 private:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    std::int8_t value = 0;
    int match = -1;    // child when x[feature] == value
    int rest = -1;     // child otherwise
    std::array<double, 3> probs{};
  };
  using Tree = std::vector<Node>;

  static Tree build_tree(std::span<const std::int8_t> features, int n, int f_count,
                         std::span<const std::int8_t> labels, const ForestParams& params,
                         std::uint64_t tree_seed);

  std::vector<Tree> trees_;
};

}  // namespace mrsens
