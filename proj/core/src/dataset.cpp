#include "mrsens/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "mrsens/errors.hpp"
#include "mrsens/variable.hpp"

namespace mrsens {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

Dataset Dataset::empty(int n_rows, int n_cols) {
  Dataset d;
  d.n = n_rows;
  d.K = n_cols;
  d.cells.assign(static_cast<std::size_t>(n_rows) * n_cols, 0);
  return d;
}

Dataset Dataset::from_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty file: " + path.string());
  auto header = split_csv_line(line);
  if (header.size() < 2 || lower(header[0]) != "id") {
    throw IoError(path.string() + ": expected header id,visit_1,...,visit_K");
  }
  Dataset d;
  d.K = static_cast<int>(header.size()) - 1;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != d.K + 1) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                    std::to_string(d.K + 1) + " fields, got " +
                    std::to_string(fields.size()));
    }
    for (int k = 0; k < d.K; ++k) {
      const std::string v = lower(fields[k + 1]);
      if (v == "0") {
        d.cells.push_back(0);
      } else if (v == "1") {
        d.cells.push_back(1);
      } else if (v.empty() || v == "na") {
        d.cells.push_back(kObservedCodeMissing);
      } else {
        throw IoError(path.string() + ":" + std::to_string(line_no) +
                      ": bad cell value '" + fields[k + 1] + "' in column visit_" +
                      std::to_string(k + 1));
      }
    }
    ++d.n;
  }
  return d;
}

void Dataset::to_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "id";
  for (int k = 1; k <= K; ++k) out << ",visit_" << k;
  out << "\n";
  for (int i = 0; i < n; ++i) {
    out << (i + 1);
    for (int k = 0; k < K; ++k) {
      std::int8_t c = at(i, k);
      out << "," << (c == kObservedCodeMissing ? std::string("NA") : std::to_string(int(c)));
    }
    out << "\n";
  }
}

double Dataset::observed_mean(int col, int* n_observed) const {
  long count = 0;
  long ones = 0;
  for (int i = 0; i < n; ++i) {
    std::int8_t c = at(i, col);
    if (c != kObservedCodeMissing) {
      ++count;
      ones += (c == 1);
    }
  }
  if (n_observed) *n_observed = static_cast<int>(count);
  return count == 0 ? 0.0 : static_cast<double>(ones) / static_cast<double>(count);
}

PatternCounts pattern_summary(const Dataset& d) {
  PatternCounts p;
  p.n = d.n;
  for (int i = 0; i < d.n; ++i) {
    int missing = 0;
    int first_missing = d.K;  // first missing column (0-based), K if none
    bool observed_after_missing = false;
    for (int k = 0; k < d.K; ++k) {
      if (d.at(i, k) == kObservedCodeMissing) {
        ++missing;
        if (first_missing == d.K) first_missing = k;
      } else if (first_missing < d.K) {
        observed_after_missing = true;
      }
    }
    if (missing == 0) {
      ++p.complete;
    } else if (missing == d.K) {
      ++p.all_missing;
    } else if (!observed_after_missing) {
      ++p.monotone_dropout;  // missing set is exactly a trailing suffix
    } else if (missing == 1) {
      ++p.non_monotone_1;
    } else if (missing == 2) {
      ++p.non_monotone_2;
    } else if (missing == 3) {
      ++p.non_monotone_3;
    } else {
      ++p.non_monotone_4plus;
    }
  }
  return p;
}

}  // namespace mrsens
