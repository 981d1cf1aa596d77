#include "mrsens/variable.hpp"

#include <algorithm>

#include "mrsens/errors.hpp"

namespace mrsens {

Schema canonical_schema(Schema s) {
  std::sort(s.begin(), s.end());
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i] == s[i - 1]) {
      throw NumericError("duplicate variable in schema: " + to_string(s[i]));
    }
  }
  return s;
}

std::string to_string(const Schema& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += to_string(s[i]);
  }
  out += ")";
  return out;
}

Schema var_range(VarKind kind, int lo, int hi) {
  Schema s;
  for (int i = lo; i <= hi; ++i) s.push_back({kind, i});
  return s;
}

}  // namespace mrsens
