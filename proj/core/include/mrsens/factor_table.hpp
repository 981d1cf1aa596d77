#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "mrsens/variable.hpp"

namespace mrsens {

// Process-wide gauge of live FactorTable entries. Lets tests pin the
// peak working-set of the identification recursion against the
// 3^{2m+2}(K-2m-1) + 2*3^{2m+2} budget.
namespace storage_gauge {
std::size_t current();
std::size_t peak();
void reset_peak();
}  // namespace storage_gauge

// Dense nonnegative table over a canonical schema of discrete variables.
// Values are row-major in schema order (first variable slowest).
// Immutable by convention once built: all operations return new tables.
class FactorTable {
 public:
  // Empty-schema table holding a single 0.
  FactorTable();
  // Zero-filled table over the given variables (sorted canonically).
  explicit FactorTable(Schema schema);
  FactorTable(Schema schema, std::vector<double> values);

  FactorTable(const FactorTable&);
  FactorTable(FactorTable&&) noexcept;
  FactorTable& operator=(const FactorTable&);
  FactorTable& operator=(FactorTable&&) noexcept;
  ~FactorTable();

  // Empty-schema table with value 1 (multiplicative identity).
  static FactorTable unit();

  const Schema& schema() const { return schema_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  // Position of v in the schema, or -1.
  int find(const VariableRef& v) const;
  bool contains(const VariableRef& v) const { return find(v) >= 0; }
  std::size_t stride(int pos) const { return strides_[pos]; }

  // Linear index of a full assignment (digits in schema order).
  std::size_t index_of(std::span<const int> digits) const;
  void decode(std::size_t idx, std::span<int> digits) const;
  double at(std::span<const int> digits) const { return values_[index_of(digits)]; }

  double sum() const;
  double max_abs() const;
  bool all_finite_nonnegative() const;

  // Scales to total mass 1; throws NumericError when the sum is not positive.
  FactorTable& normalize();

  bool is_normalized(double tol = 1e-12) const;
  // True when the table sums to 1 (within tol) for every assignment of `given`.
  bool is_conditional_on(const Schema& given, double tol = 1e-12) const;

 private:
  void register_storage(std::size_t n);
  void release_storage();

  Schema schema_;
  std::vector<std::size_t> strides_;
  std::vector<double> values_;
  std::size_t registered_ = 0;
};

// Pointwise product over the union schema. Shared variables (same kind and
// index) are matched; the alphabet is fixed by the kind, so a schema
// conflict is impossible by construction.
FactorTable product(const FactorTable& a, const FactorTable& b);

// Generic cellwise combine over the union schema, broadcasting as product does.
FactorTable zip(const FactorTable& a, const FactorTable& b,
                const std::function<double(double, double)>& op);

FactorTable transform(const FactorTable& t, const std::function<double(double)>& op);

// Sums out `out` (must be a subset of the schema); total mass is preserved.
FactorTable marginalize(const FactorTable& t, const Schema& out);

struct Evidence {
  VariableRef var;
  int value;
};

// Unnormalized restriction; evidence variables leave the schema.
FactorTable slice(const FactorTable& t, const std::vector<Evidence>& evidence);

// Divides by the marginal over `given`, producing a conditional-on-given
// table. A given-assignment with zero marginal raises NumericError naming
// the assignment.
FactorTable to_conditional(const FactorTable& t, const Schema& given);

// Restricts O_index to codes {0,1} (i.e. conditions on R_index = 1, keeping
// the sub-probability mass) and relabels the variable as the binary Y_index.
// This is the bridge between observed-data windows and mixed (Y, O) tables.
FactorTable observe_as_outcome(const FactorTable& t, int index);

// L-infinity distance; schemas must match exactly.
double l_inf_distance(const FactorTable& a, const FactorTable& b);

}  // namespace mrsens
