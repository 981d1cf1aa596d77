#pragma once

// Brute-force reference implementations for the table algebra, kept
// deliberately independent of FactorTable's stride machinery: tables are
// maps from full assignments to values, and every operation is a nested
// loop over enumerated assignments.

#include <map>
#include <vector>

#include "mrsens/factor_table.hpp"
#include "mrsens/rng.hpp"

namespace mrsens::testing {

using Assignment = std::map<VariableRef, int>;  // VariableRef has operator<

struct RefTable {
  Schema schema;
  std::map<std::vector<int>, double> cells;  // digits in schema order
};

// All assignments of a schema, first variable slowest (row-major order).
inline std::vector<std::vector<int>> enumerate_assignments(const Schema& s) {
  std::vector<std::vector<int>> out;
  std::vector<int> digits(s.size(), 0);
  for (;;) {
    out.push_back(digits);
    int p = static_cast<int>(s.size()) - 1;
    while (p >= 0 && digits[static_cast<std::size_t>(p)] == alphabet_size(s[static_cast<std::size_t>(p)]) - 1) {
      digits[static_cast<std::size_t>(p)] = 0;
      --p;
    }
    if (p < 0) break;
    ++digits[static_cast<std::size_t>(p)];
  }
  return out;
}

inline Assignment to_assignment(const Schema& s, const std::vector<int>& digits) {
  Assignment a;
  for (std::size_t i = 0; i < s.size(); ++i) a[s[i]] = digits[i];
  return a;
}

inline std::vector<int> project(const Schema& s, const Assignment& a) {
  std::vector<int> digits;
  for (const auto& v : s) digits.push_back(a.at(v));
  return digits;
}

inline RefTable ref_from(const FactorTable& t) {
  RefTable r;
  r.schema = t.schema();
  std::size_t i = 0;
  for (const auto& digits : enumerate_assignments(r.schema)) r.cells[digits] = t[i++];
  return r;
}

inline Schema ref_union(const Schema& a, const Schema& b) {
  Schema u = a;
  for (const auto& v : b) {
    bool found = false;
    for (const auto& w : u) found = found || (w == v);
    if (!found) u.push_back(v);
  }
  return canonical_schema(u);
}

inline RefTable ref_product(const RefTable& a, const RefTable& b) {
  RefTable r;
  r.schema = ref_union(a.schema, b.schema);
  for (const auto& digits : enumerate_assignments(r.schema)) {
    Assignment full = to_assignment(r.schema, digits);
    r.cells[digits] = a.cells.at(project(a.schema, full)) * b.cells.at(project(b.schema, full));
  }
  return r;
}

inline RefTable ref_marginalize(const RefTable& t, const Schema& out) {
  RefTable r;
  for (const auto& v : t.schema) {
    bool removed = false;
    for (const auto& w : out) removed = removed || (w == v);
    if (!removed) r.schema.push_back(v);
  }
  for (const auto& digits : enumerate_assignments(r.schema)) r.cells[digits] = 0.0;
  for (const auto& [digits, value] : t.cells) {
    Assignment full = to_assignment(t.schema, digits);
    r.cells[project(r.schema, full)] += value;
  }
  return r;
}

inline RefTable ref_slice(const RefTable& t, const std::vector<Evidence>& evidence) {
  RefTable r;
  for (const auto& v : t.schema) {
    bool removed = false;
    for (const auto& ev : evidence) removed = removed || (ev.var == v);
    if (!removed) r.schema.push_back(v);
  }
  for (const auto& [digits, value] : t.cells) {
    Assignment full = to_assignment(t.schema, digits);
    bool match = true;
    for (const auto& ev : evidence) match = match && (full.at(ev.var) == ev.value);
    if (match) r.cells[project(r.schema, full)] = value;
  }
  return r;
}

inline RefTable ref_conditional(const RefTable& t, const Schema& given) {
  Schema others;
  for (const auto& v : t.schema) {
    bool in_given = false;
    for (const auto& w : given) in_given = in_given || (w == v);
    if (!in_given) others.push_back(v);
  }
  RefTable denom = ref_marginalize(t, others);
  RefTable r;
  r.schema = t.schema;
  for (const auto& [digits, value] : t.cells) {
    Assignment full = to_assignment(t.schema, digits);
    r.cells[digits] = value / denom.cells.at(project(denom.schema, full));
  }
  return r;
}

inline double ref_max_diff(const RefTable& r, const FactorTable& t) {
  if (r.schema != t.schema()) return 1e99;
  double d = 0.0;
  std::size_t i = 0;
  for (const auto& digits : enumerate_assignments(r.schema)) {
    d = std::max(d, std::fabs(r.cells.at(digits) - t[i++]));
  }
  return d;
}

// Random table over <= max_vars variables drawn from {Y1..Y4, O1..O4};
// a share of cells is zeroed to exercise sparsity edge cases.
inline FactorTable random_table(Rng& rng, int max_vars, double zero_share = 0.15) {
  std::vector<VariableRef> pool = {yvar(1), yvar(2), yvar(3), yvar(4),
                                   ovar(1), ovar(2), ovar(3), ovar(4)};
  int n_vars = rng.uniform_int(max_vars + 1);
  Schema schema;
  for (int i = 0; i < n_vars; ++i) {
    int r = i + rng.uniform_int(static_cast<int>(pool.size()) - i);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(r)]);
    schema.push_back(pool[static_cast<std::size_t>(i)]);
  }
  FactorTable t{canonical_schema(schema)};
  for (double& v : t.values()) {
    v = rng.uniform01() < zero_share ? 0.0 : rng.uniform01();
  }
  return t;
}

}  // namespace mrsens::testing
