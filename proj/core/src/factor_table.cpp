#include "mrsens/factor_table.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <sstream>

#include "mrsens/errors.hpp"

namespace mrsens {

namespace {

std::atomic<std::size_t> g_live_entries{0};
std::atomic<std::size_t> g_peak_entries{0};

void gauge_add(std::size_t n) {
  std::size_t cur = g_live_entries.fetch_add(n) + n;
  std::size_t peak = g_peak_entries.load();
  while (cur > peak && !g_peak_entries.compare_exchange_weak(peak, cur)) {
  }
}

void gauge_sub(std::size_t n) { g_live_entries.fetch_sub(n); }

std::vector<std::size_t> compute_strides(const Schema& s) {
  std::vector<std::size_t> strides(s.size());
  std::size_t acc = 1;
  for (int i = static_cast<int>(s.size()) - 1; i >= 0; --i) {
    strides[i] = acc;
    acc *= static_cast<std::size_t>(alphabet_size(s[i]));
  }
  return strides;
}

std::size_t table_size(const Schema& s) {
  std::size_t n = 1;
  for (const auto& v : s) n *= static_cast<std::size_t>(alphabet_size(v));
  return n;
}

// Walks the cells of `out_schema` in row-major order, keeping linear
// offsets into a set of input tables whose schemas are subsets of it.
struct Odometer {
  std::vector<int> card;
  std::vector<int> digit;
  // strides_in[t][pos]: stride of out-variable pos inside input t (0 if absent)
  std::vector<std::vector<std::size_t>> strides_in;
  std::vector<std::size_t> offset;

  Odometer(const Schema& out_schema, std::vector<const FactorTable*> inputs) {
    card.reserve(out_schema.size());
    for (const auto& v : out_schema) card.push_back(alphabet_size(v));
    digit.assign(out_schema.size(), 0);
    offset.assign(inputs.size(), 0);
    strides_in.resize(inputs.size());
    for (std::size_t t = 0; t < inputs.size(); ++t) {
      strides_in[t].assign(out_schema.size(), 0);
      for (std::size_t p = 0; p < out_schema.size(); ++p) {
        int pos = inputs[t]->find(out_schema[p]);
        if (pos >= 0) strides_in[t][p] = inputs[t]->stride(pos);
      }
    }
  }

  // Advances to the next cell; returns false after the last one.
  bool advance() {
    for (int p = static_cast<int>(digit.size()) - 1; p >= 0; --p) {
      ++digit[p];
      for (std::size_t t = 0; t < offset.size(); ++t) offset[t] += strides_in[t][p];
      if (digit[p] < card[p]) return true;
      for (std::size_t t = 0; t < offset.size(); ++t)
        offset[t] -= strides_in[t][p] * static_cast<std::size_t>(card[p]);
      digit[p] = 0;
    }
    return false;
  }
};

Schema schema_union(const Schema& a, const Schema& b) {
  Schema out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

Schema schema_minus(const Schema& a, const Schema& b) {
  Schema out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::string describe_assignment(const Schema& s, std::span<const int> digits) {
  std::ostringstream os;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << ", ";
    os << to_string(s[i]) << "=" << digits[i];
  }
  return os.str();
}

}  // namespace

namespace storage_gauge {
std::size_t current() { return g_live_entries.load(); }
std::size_t peak() { return g_peak_entries.load(); }
void reset_peak() { g_peak_entries.store(g_live_entries.load()); }
}  // namespace storage_gauge

FactorTable::FactorTable() : FactorTable(Schema{}) {}

FactorTable::FactorTable(Schema schema)
    : schema_(canonical_schema(std::move(schema))),
      strides_(compute_strides(schema_)),
      values_(table_size(schema_), 0.0) {
  register_storage(values_.size());
}

FactorTable::FactorTable(Schema schema, std::vector<double> values)
    : schema_(canonical_schema(std::move(schema))),
      strides_(compute_strides(schema_)),
      values_(std::move(values)) {
  if (values_.size() != table_size(schema_)) {
    throw NumericError("value count does not match schema " + to_string(schema_));
  }
  register_storage(values_.size());
}

FactorTable::FactorTable(const FactorTable& o)
    : schema_(o.schema_), strides_(o.strides_), values_(o.values_) {
  register_storage(values_.size());
}

FactorTable::FactorTable(FactorTable&& o) noexcept
    : schema_(std::move(o.schema_)),
      strides_(std::move(o.strides_)),
      values_(std::move(o.values_)),
      registered_(o.registered_) {
  o.registered_ = 0;
}

FactorTable& FactorTable::operator=(const FactorTable& o) {
  if (this != &o) {
    release_storage();
    schema_ = o.schema_;
    strides_ = o.strides_;
    values_ = o.values_;
    register_storage(values_.size());
  }
  return *this;
}

FactorTable& FactorTable::operator=(FactorTable&& o) noexcept {
  if (this != &o) {
    release_storage();
    schema_ = std::move(o.schema_);
    strides_ = std::move(o.strides_);
    values_ = std::move(o.values_);
    registered_ = o.registered_;
    o.registered_ = 0;
  }
  return *this;
}

FactorTable::~FactorTable() { release_storage(); }

void FactorTable::register_storage(std::size_t n) {
  registered_ = n;
  gauge_add(n);
}

void FactorTable::release_storage() {
  if (registered_) {
    gauge_sub(registered_);
    registered_ = 0;
  }
}

FactorTable FactorTable::unit() {
  return FactorTable(Schema{}, std::vector<double>{1.0});
}

int FactorTable::find(const VariableRef& v) const {
  auto it = std::lower_bound(schema_.begin(), schema_.end(), v);
  if (it != schema_.end() && *it == v) return static_cast<int>(it - schema_.begin());
  return -1;
}

std::size_t FactorTable::index_of(std::span<const int> digits) const {
  std::size_t idx = 0;
  for (std::size_t p = 0; p < schema_.size(); ++p) {
    idx += strides_[p] * static_cast<std::size_t>(digits[p]);
  }
  return idx;
}

void FactorTable::decode(std::size_t idx, std::span<int> digits) const {
  for (std::size_t p = 0; p < schema_.size(); ++p) {
    digits[p] = static_cast<int>(idx / strides_[p]) % alphabet_size(schema_[p]);
  }
}

double FactorTable::sum() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s;
}

double FactorTable::max_abs() const {
  double s = 0.0;
  for (double v : values_) s = std::max(s, std::fabs(v));
  return s;
}

bool FactorTable::all_finite_nonnegative() const {
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) return false;
  }
  return true;
}

FactorTable& FactorTable::normalize() {
  double s = sum();
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw NumericError("cannot normalize table with mass " + std::to_string(s) +
                       " over " + to_string(schema_));
  }
  for (double& v : values_) v /= s;
  return *this;
}

bool FactorTable::is_normalized(double tol) const {
  return std::fabs(sum() - 1.0) <= tol;
}

bool FactorTable::is_conditional_on(const Schema& given, double tol) const {
  FactorTable m = marginalize(*this, schema_minus(schema_, given));
  for (double v : m.values()) {
    if (std::fabs(v - 1.0) > tol) return false;
  }
  return true;
}

FactorTable zip(const FactorTable& a, const FactorTable& b,
                const std::function<double(double, double)>& op) {
  Schema out_schema = schema_union(a.schema(), b.schema());
  FactorTable out(out_schema);
  Odometer odo(out_schema, {&a, &b});
  auto av = a.values();
  auto bv = b.values();
  auto ov = out.values();
  std::size_t i = 0;
  do {
    ov[i++] = op(av[odo.offset[0]], bv[odo.offset[1]]);
  } while (odo.advance());
  return out;
}

FactorTable product(const FactorTable& a, const FactorTable& b) {
  Schema out_schema = schema_union(a.schema(), b.schema());
  FactorTable out(out_schema);
  Odometer odo(out_schema, {&a, &b});
  auto av = a.values();
  auto bv = b.values();
  auto ov = out.values();
  std::size_t i = 0;
  do {
    ov[i++] = av[odo.offset[0]] * bv[odo.offset[1]];
  } while (odo.advance());
  return out;
}

FactorTable transform(const FactorTable& t, const std::function<double(double)>& op) {
  FactorTable out(t.schema());
  auto tv = t.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < tv.size(); ++i) ov[i] = op(tv[i]);
  return out;
}

FactorTable marginalize(const FactorTable& t, const Schema& out_vars) {
  Schema removed = canonical_schema(out_vars);
  for (const auto& v : removed) {
    if (!t.contains(v)) {
      throw NumericError("marginalize: " + to_string(v) + " not in schema " +
                         to_string(t.schema()));
    }
  }
  Schema kept = schema_minus(t.schema(), removed);
  FactorTable out(kept);
  Odometer odo(t.schema(), {&out});
  auto tv = t.values();
  auto ov = out.values();
  std::size_t i = 0;
  do {
    ov[odo.offset[0]] += tv[i++];
  } while (odo.advance());
  return out;
}

FactorTable slice(const FactorTable& t, const std::vector<Evidence>& evidence) {
  Schema removed;
  std::size_t base = 0;
  for (const auto& ev : evidence) {
    int pos = t.find(ev.var);
    if (pos < 0) {
      throw NumericError("slice: " + to_string(ev.var) + " not in schema " +
                         to_string(t.schema()));
    }
    if (ev.value < 0 || ev.value >= alphabet_size(ev.var)) {
      throw NumericError("slice: value " + std::to_string(ev.value) +
                         " out of alphabet for " + to_string(ev.var));
    }
    removed.push_back(ev.var);
    base += t.stride(pos) * static_cast<std::size_t>(ev.value);
  }
  removed = canonical_schema(removed);
  Schema kept = schema_minus(t.schema(), removed);
  FactorTable out(kept);
  Odometer odo(kept, {&t});
  auto tv = t.values();
  auto ov = out.values();
  std::size_t i = 0;
  do {
    ov[i++] = tv[base + odo.offset[0]];
  } while (odo.advance());
  return out;
}

FactorTable to_conditional(const FactorTable& t, const Schema& given) {
  Schema g = canonical_schema(given);
  for (const auto& v : g) {
    if (!t.contains(v)) {
      throw NumericError("to_conditional: " + to_string(v) + " not in schema " +
                         to_string(t.schema()));
    }
  }
  FactorTable denom = marginalize(t, schema_minus(t.schema(), g));
  FactorTable out(t.schema());
  Odometer odo(t.schema(), {&denom});
  auto tv = t.values();
  auto dv = denom.values();
  auto ov = out.values();
  std::size_t i = 0;
  do {
    double d = dv[odo.offset[0]];
    if (d <= 0.0) {
      std::vector<int> digits(g.size());
      denom.decode(odo.offset[0], digits);
      throw NumericError("to_conditional: zero marginal at {" +
                         describe_assignment(g, digits) + "}");
    }
    ov[i] = tv[i] / d;
    ++i;
  } while (odo.advance());
  return out;
}

FactorTable observe_as_outcome(const FactorTable& t, int index) {
  int pos = t.find(ovar(index));
  if (pos < 0) {
    throw NumericError("observe_as_outcome: O" + std::to_string(index) +
                       " not in schema " + to_string(t.schema()));
  }
  if (t.contains(yvar(index))) {
    throw NumericError("observe_as_outcome: Y" + std::to_string(index) +
                       " already present in schema");
  }
  Schema out_schema = t.schema();
  out_schema[pos] = yvar(index);  // canonical position is unchanged
  std::size_t inner = t.stride(pos);
  std::size_t outer = t.size() / (inner * 3);
  std::vector<double> vals;
  vals.reserve(outer * 2 * inner);
  auto tv = t.values();
  for (std::size_t p = 0; p < outer; ++p) {
    std::size_t off = p * 3 * inner;
    vals.insert(vals.end(), tv.begin() + off, tv.begin() + off + 2 * inner);
  }
  return FactorTable(std::move(out_schema), std::move(vals));
}

double l_inf_distance(const FactorTable& a, const FactorTable& b) {
  if (a.schema() != b.schema()) {
    throw NumericError("l_inf_distance: schema mismatch " + to_string(a.schema()) +
                       " vs " + to_string(b.schema()));
  }
  double d = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) d = std::max(d, std::fabs(av[i] - bv[i]));
  return d;
}

}  // namespace mrsens
