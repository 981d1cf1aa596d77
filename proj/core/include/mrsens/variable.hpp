#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mrsens {

// Y_k is the (possibly unobserved) binary outcome at assessment k.
// O_k is the ternary observed-data code at assessment k:
//   0 = observed negative (R_k=1, Y_k=0)
//   1 = observed positive (R_k=1, Y_k=1)
//   2 = missing           (R_k=0)
enum class VarKind : std::uint8_t { OutcomeY, ObservedO };

inline constexpr int kObservedCodeMissing = 2;

struct VariableRef {
  VarKind kind{VarKind::OutcomeY};
  int index{0};  // 1-based assessment index

  friend bool operator==(const VariableRef&, const VariableRef&) = default;
};

// Canonical schema order: ascending index, O before Y at equal index.
inline bool operator<(const VariableRef& a, const VariableRef& b) {
  if (a.index != b.index) return a.index < b.index;
  return a.kind == VarKind::ObservedO && b.kind == VarKind::OutcomeY;
}

inline VariableRef yvar(int k) { return {VarKind::OutcomeY, k}; }
inline VariableRef ovar(int k) { return {VarKind::ObservedO, k}; }

inline int alphabet_size(const VariableRef& v) {
  return v.kind == VarKind::OutcomeY ? 2 : 3;
}

inline std::string to_string(const VariableRef& v) {
  return (v.kind == VarKind::OutcomeY ? "Y" : "O") + std::to_string(v.index);
}

using Schema = std::vector<VariableRef>;

// Sorts into canonical order; throws on duplicate variables.
Schema canonical_schema(Schema s);

std::string to_string(const Schema& s);

// Variables [lo, hi] of one kind; empty when lo > hi.
Schema var_range(VarKind kind, int lo, int hi);

}  // namespace mrsens
