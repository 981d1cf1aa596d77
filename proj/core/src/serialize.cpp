#include "mrsens/serialize.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mrsens/errors.hpp"

namespace mrsens {

namespace {

using nlohmann::json;

constexpr const char* kLawFormat = "observed-law/1";
constexpr const char* kResultFormat = "identified-law/1";

json schema_to_json(const Schema& s) {
  json arr = json::array();
  for (const auto& v : s) arr.push_back(to_string(v));
  return arr;
}

VariableRef variable_from_string(const std::string& name) {
  if (name.size() < 2 || (name[0] != 'O' && name[0] != 'Y')) {
    throw IoError("bad variable name '" + name + "'");
  }
  int index = 0;
  auto res = std::from_chars(name.data() + 1, name.data() + name.size(), index);
  if (res.ec != std::errc{} || res.ptr != name.data() + name.size() || index < 1) {
    throw IoError("bad variable name '" + name + "'");
  }
  return {name[0] == 'O' ? VarKind::ObservedO : VarKind::OutcomeY, index};
}

json table_to_json(const FactorTable& t) {
  json j;
  j["schema"] = schema_to_json(t.schema());
  json vals = json::array();
  for (double v : t.values()) vals.push_back(v);
  j["values"] = std::move(vals);
  return j;
}

FactorTable table_from_json(const json& j) {
  Schema schema;
  for (const auto& name : j.at("schema")) {
    schema.push_back(variable_from_string(name.get<std::string>()));
  }
  std::vector<double> values = j.at("values").get<std::vector<double>>();
  return FactorTable(std::move(schema), std::move(values));
}

}  // namespace

std::string observed_law_to_json(const ObservedLaw& law) {
  json j;
  j["format"] = kLawFormat;
  j["K"] = law.K;
  j["m"] = law.m;
  j["eps_floor"] = law.eps_floor;
  j["estimator"] = law.estimator_info;
  json windows = json::array();
  for (const auto& w : law.windows) windows.push_back(table_to_json(w));
  j["windows"] = std::move(windows);
  return j.dump(2) + "\n";
}

ObservedLaw observed_law_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw IoError(std::string("observed law: bad JSON: ") + e.what());
  }
  if (j.value("format", "") != kLawFormat) {
    throw IoError("observed law: unsupported format '" + j.value("format", "") + "'");
  }
  ObservedLaw law;
  law.K = j.at("K").get<int>();
  law.m = j.at("m").get<int>();
  law.eps_floor = j.at("eps_floor").get<double>();
  law.estimator_info = j.value("estimator", "");
  for (const auto& w : j.at("windows")) law.windows.push_back(table_from_json(w));
  law.validate();
  return law;
}

void save_observed_law(const ObservedLaw& law, const std::filesystem::path& path) {
  write_text_file(path, observed_law_to_json(law));
}

ObservedLaw load_observed_law(const std::filesystem::path& path) {
  return observed_law_from_json(read_text_file(path));
}

std::string full_law_to_json(const FullLawResult& res) {
  json j;
  j["format"] = kResultFormat;
  j["K"] = res.spec.K;
  j["m"] = res.spec.m;
  j["alphas"] = res.spec.alphas;
  j["tilt"] = res.tilt.describe();
  json gs = json::array();
  for (const auto& g : res.conditionals) gs.push_back(table_to_json(g));
  j["conditionals"] = std::move(gs);
  json pr0 = json::array();
  json pmiss = json::array();
  for (double v : res.p_r0) pr0.push_back(v);
  for (double v : res.p_miss_y1) pmiss.push_back(std::isfinite(v) ? json(v) : json());
  j["p_r0"] = std::move(pr0);
  j["p_miss_y1"] = std::move(pmiss);
  return j.dump(2) + "\n";
}

void save_full_law(const FullLawResult& res, const std::filesystem::path& path) {
  write_text_file(path, full_law_to_json(res));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace mrsens
