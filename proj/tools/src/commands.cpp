#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "mrsens/dataset.hpp"
#include "mrsens/errors.hpp"
#include "mrsens/graph.hpp"
#include "mrsens/infer.hpp"
#include "mrsens/parallel.hpp"
#include "mrsens/oracle.hpp"
#include "mrsens/serialize.hpp"
#include "mrsens/simulate.hpp"
#include "mrsens/version.hpp"

namespace mrsens::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// ---- small parsing helpers ----

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad " + what + ": '" + s + "'");
  }
}

int parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad " + what + ": '" + s + "'");
  }
}

std::vector<double> parse_alpha_grid(const std::string& spec) {
  auto parts = split(spec, ':');
  if (parts.size() != 3) throw ConfigError("alpha grid must be lo:hi:step, got '" + spec + "'");
  double lo = parse_double(parts[0], "alpha grid");
  double hi = parse_double(parts[1], "alpha grid");
  double step = parse_double(parts[2], "alpha grid");
  if (step <= 0.0 || hi < lo) throw ConfigError("alpha grid must satisfy lo <= hi, step > 0");
  std::vector<double> out;
  for (double a = lo; a <= hi + 1e-9 * step; a += step) out.push_back(a);
  return out;
}

std::vector<int> parse_int_list(const std::string& spec, const std::string& what) {
  std::vector<int> out;
  for (const auto& p : split(spec, ',')) out.push_back(parse_int(p, what));
  if (out.empty()) throw ConfigError("empty " + what);
  return out;
}

FunctionalSpec parse_functional(const std::string& spec, int K) {
  FunctionalSpec f;
  if (spec == "count") {
    f.kind = FunctionalSpec::Kind::ExpectedNegativeCount;
  } else if (spec.rfind("mean:", 0) == 0) {
    f.kind = FunctionalSpec::Kind::MarginalMean;
    f.k = parse_int(spec.substr(5), "functional visit");
  } else if (spec.rfind("joint:", 0) == 0) {
    f.kind = FunctionalSpec::Kind::JointProb;
    for (char c : spec.substr(6)) {
      if (c != '0' && c != '1') throw ConfigError("joint functional wants a 0/1 string");
      f.sequence.push_back(c - '0');
    }
    if (static_cast<int>(f.sequence.size()) != K) {
      throw ConfigError("joint functional needs exactly K bits");
    }
  } else {
    throw ConfigError("unknown functional '" + spec + "' (count | mean:<k> | joint:<bits>)");
  }
  return f;
}

// scalar | comma vector of length K -> TiltSpec; mcar/missing0/missing1 are
// handled by the bootstrap command.
TiltSpec parse_tilt(const std::string& alpha, int K) {
  if (alpha == "missing0") return TiltSpec::missing_zero(K);
  if (alpha == "missing1") return TiltSpec::missing_one(K);
  auto parts = split(alpha, ',');
  if (parts.size() == 1) return TiltSpec::constant(parse_double(parts[0], "alpha"), K);
  if (static_cast<int>(parts.size()) != K) {
    throw ConfigError("alpha vector must have length K=" + std::to_string(K));
  }
  std::vector<double> v;
  for (const auto& p : parts) v.push_back(parse_double(p, "alpha"));
  return TiltSpec::vector(std::move(v));
}

// ---- config plumbing ----

EstimatorConfig estimator_config(const RunConfig& cfg) {
  EstimatorConfig e;
  if (cfg.estimator == "empirical") {
    e.kind = EstimatorConfig::Kind::Empirical;
  } else if (cfg.estimator == "forest") {
    e.kind = EstimatorConfig::Kind::Forest;
  } else {
    throw ConfigError("unknown estimator '" + cfg.estimator + "' (empirical | forest)");
  }
  e.smoothing = cfg.smoothing;
  e.forest.n_trees = cfg.trees;
  e.forest.max_depth = cfg.max_depth;
  e.forest.min_leaf = cfg.min_leaf;
  e.seed = cfg.seed;
  e.threads = cfg.threads <= 0 ? default_threads() : cfg.threads;
  return e;
}

BootstrapOptions bootstrap_options(const RunConfig& cfg) {
  BootstrapOptions b;
  b.B = cfg.bootstrap_b;
  b.seed = cfg.seed;
  b.level = cfg.level;
  b.anchor_lo = cfg.anchor_lo;
  b.anchor_hi = cfg.anchor_hi;
  if (cfg.bootstrap_kind == "parametric") {
    b.nonparametric = false;
  } else if (cfg.bootstrap_kind == "nonparametric") {
    b.nonparametric = true;
  } else {
    throw ConfigError("bootstrap kind must be parametric or nonparametric");
  }
  b.threads = cfg.threads <= 0 ? default_threads() : cfg.threads;
  return b;
}

Dataset load_input(const std::string& path, int expect_k) {
  if (path.empty()) throw ConfigError("missing --input");
  Dataset d = Dataset::from_csv(path);
  if (expect_k > 0 && d.K != expect_k) {
    throw ConfigError(path + ": CSV has K=" + std::to_string(d.K) +
                      " visits but --k says " + std::to_string(expect_k));
  }
  return d;
}

json config_to_json(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  j["input"] = c.input;
  j["input_b"] = c.input_b;
  j["law_file"] = c.law_file;
  j["k"] = c.k;
  j["m"] = c.m;
  j["alpha"] = c.alpha;
  j["alpha_grid"] = c.alpha_grid;
  j["alpha_grid_b"] = c.alpha_grid_b;
  j["functional"] = c.functional;
  j["estimator"] = c.estimator;
  j["trees"] = c.trees;
  j["max_depth"] = c.max_depth;
  j["min_leaf"] = c.min_leaf;
  j["smoothing"] = c.smoothing;
  j["bootstrap"] = c.bootstrap_b;
  j["bootstrap_kind"] = c.bootstrap_kind;
  j["seed"] = c.seed;
  j["out"] = c.out;
  j["format"] = c.format;
  j["n_list"] = c.n_list;
  j["reps"] = c.reps;
  j["check_seeds"] = c.check_seeds;
  j["anchor_lo"] = c.anchor_lo;
  j["anchor_hi"] = c.anchor_hi;
  j["level"] = c.level;
  j["threads"] = c.threads;
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  c.command = j.at("command").get<std::string>();
  c.input = j.value("input", "");
  c.input_b = j.value("input_b", "");
  c.law_file = j.value("law_file", "");
  c.k = j.value("k", 0);
  c.m = j.value("m", 1);
  c.alpha = j.value("alpha", "0");
  c.alpha_grid = j.value("alpha_grid", "");
  c.alpha_grid_b = j.value("alpha_grid_b", "");
  c.functional = j.value("functional", "count");
  c.estimator = j.value("estimator", "empirical");
  c.trees = j.value("trees", 1000);
  c.max_depth = j.value("max_depth", 12);
  c.min_leaf = j.value("min_leaf", 5);
  c.smoothing = j.value("smoothing", 0.5);
  c.bootstrap_b = j.value("bootstrap", 1000);
  c.bootstrap_kind = j.value("bootstrap_kind", "parametric");
  c.seed = j.value("seed", std::uint64_t{1});
  c.out = j.value("out", ".");
  c.format = j.value("format", "csv");
  c.n_list = j.value("n_list", "250,500");
  c.reps = j.value("reps", 100);
  c.check_seeds = j.value("check_seeds", 3);
  c.anchor_lo = j.value("anchor_lo", -5.0);
  c.anchor_hi = j.value("anchor_hi", 5.0);
  c.level = j.value("level", 0.95);
  c.threads = j.value("threads", 0);
  return c;
}

void write_manifest(const RunConfig& cfg) {
  json j;
  j["tool"] = "mrsens";
  j["version"] = kVersion;
  j["config"] = config_to_json(cfg);
  write_text_file(fs::path(cfg.out) / "manifest.json", j.dump(2) + "\n");
}

// ---- tabular output ----

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

void write_table(const Table& t, const RunConfig& cfg, const std::string& stem) {
  fs::path dir(cfg.out);
  if (cfg.format == "json") {
    json arr = json::array();
    for (const auto& row : t.rows) {
      json obj;
      for (std::size_t i = 0; i < t.header.size(); ++i) obj[t.header[i]] = row[i];
      arr.push_back(std::move(obj));
    }
    write_text_file(dir / (stem + ".json"), arr.dump(2) + "\n");
    return;
  }
  if (cfg.format != "csv") throw ConfigError("format must be csv or json");
  std::string out;
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (i) out += ",";
    out += t.header[i];
  }
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ",";
      out += row[i];
    }
    out += "\n";
  }
  write_text_file(dir / (stem + ".csv"), out);
}

std::string fmt(double v) { return format_double(v); }

ModelSpec make_spec(const RunConfig& cfg, int K) {
  return ModelSpec::constant_alpha(K, cfg.m, 0.0);
}

// ---- commands ----

void cmd_patterns(const RunConfig& cfg) {
  Dataset d = load_input(cfg.input, cfg.k);
  PatternCounts p = pattern_summary(d);
  Table t;
  t.header = {"pattern", "count", "percent"};
  auto row = [&](const std::string& name, int count) {
    t.add_row({name, std::to_string(count), fmt(p.pct(count))});
  };
  row("complete", p.complete);
  row("monotone_dropout", p.monotone_dropout);
  row("all_missing", p.all_missing);
  row("non_monotone_1", p.non_monotone_1);
  row("non_monotone_2", p.non_monotone_2);
  row("non_monotone_3", p.non_monotone_3);
  row("non_monotone_4plus", p.non_monotone_4plus);
  t.add_row({"total", std::to_string(p.n), fmt(p.n ? 100.0 : 0.0)});
  write_table(t, cfg, "patterns");
  std::cout << "patterns: n=" << p.n << " complete=" << p.complete
            << " monotone_dropout=" << p.monotone_dropout
            << " all_missing=" << p.all_missing << " non_monotone="
            << p.non_monotone_1 + p.non_monotone_2 + p.non_monotone_3 + p.non_monotone_4plus
            << "\n";
}

void cmd_fit(const RunConfig& cfg) {
  Dataset d = load_input(cfg.input, cfg.k);
  ModelSpec spec = make_spec(cfg, d.K);
  ObservedLaw law = fit_observed_law(d, spec, estimator_config(cfg));
  save_observed_law(law, fs::path(cfg.out) / "law.json");
  DiagnosticReport rep = fit_diagnostic(d, law);
  Table t;
  t.header = {"j", "j_prime", "max_abs_diff"};
  for (const auto& pr : rep.pairs) {
    t.add_row({std::to_string(pr.j), std::to_string(pr.j_prime), fmt(pr.max_abs_diff)});
  }
  write_table(t, cfg, "fit_diagnostic");
  std::cout << "fit: K=" << law.K << " m=" << law.m << " windows=" << law.n_windows()
            << " estimator=" << law.estimator_info
            << " pairwise_max_abs_diff=" << fmt(rep.overall_max) << "\n";
}

void cmd_identify(const RunConfig& cfg) {
  Dataset d = load_input(cfg.input, cfg.k);
  ModelSpec spec = make_spec(cfg, d.K);
  TiltSpec tilt = parse_tilt(cfg.alpha, d.K);
  ObservedLaw law = fit_observed_law(d, spec, estimator_config(cfg));
  IdentifyOptions opts;
  opts.retain_marginals = false;
  FullLawResult res = identify_all(law, spec, tilt, opts);
  save_full_law(res, fs::path(cfg.out) / "full_law.json");
  FunctionalSpec fspec = parse_functional(cfg.functional, d.K);
  std::cout << "identify: " << tilt.describe() << " "
            << fspec.describe() << "=" << fmt(evaluate_functional(res, fspec)) << "\n";
}

void cmd_sensitivity(const RunConfig& cfg) {
  Dataset d = load_input(cfg.input, cfg.k);
  ModelSpec spec = make_spec(cfg, d.K);
  if (cfg.alpha_grid.empty()) throw ConfigError("sensitivity needs --alpha-grid lo:hi:step");
  std::vector<double> alphas = parse_alpha_grid(cfg.alpha_grid);
  FunctionalSpec fspec = parse_functional(cfg.functional, d.K);
  auto rows = sensitivity_grid(d, spec, estimator_config(cfg), alphas, fspec,
                               bootstrap_options(cfg));
  Table t;
  t.header = {"alpha", "estimate", "se", "lower", "upper", "t_star", "B", "error"};
  for (const auto& r : rows) {
    t.add_row({fmt(r.alpha), fmt(r.ci.estimate), fmt(r.ci.se), fmt(r.ci.lower),
               fmt(r.ci.upper), fmt(r.ci.t_star), std::to_string(r.ci.B), r.error});
  }
  write_table(t, cfg, "sensitivity");
  std::cout << "sensitivity: " << rows.size() << " grid points written\n";
}

void cmd_contour(const RunConfig& cfg) {
  Dataset da = load_input(cfg.input, cfg.k);
  if (cfg.input_b.empty()) throw ConfigError("contour needs --input-b");
  Dataset db = load_input(cfg.input_b, cfg.k);
  if (da.K != db.K) throw ConfigError("contour: arms must share K");
  ModelSpec spec = make_spec(cfg, da.K);
  if (cfg.alpha_grid.empty()) throw ConfigError("contour needs --alpha-grid lo:hi:step");
  std::vector<double> alphas_a = parse_alpha_grid(cfg.alpha_grid);
  std::vector<double> alphas_b =
      cfg.alpha_grid_b.empty() ? alphas_a : parse_alpha_grid(cfg.alpha_grid_b);
  FunctionalSpec fspec = parse_functional(cfg.functional, da.K);
  auto cells = contour_grid(da, db, spec, estimator_config(cfg), alphas_a, alphas_b,
                            fspec, bootstrap_options(cfg));
  Table t;
  t.header = {"alpha_a", "alpha_b", "difference", "se",
              "lower",   "upper",   "t_star",     "excludes_zero"};
  for (const auto& c : cells) {
    t.add_row({fmt(c.alpha_a), fmt(c.alpha_b), fmt(c.difference), fmt(c.se), fmt(c.lower),
               fmt(c.upper), fmt(c.t_star), c.excludes_zero ? "1" : "0"});
  }
  write_table(t, cfg, "contour");
  std::cout << "contour: " << cells.size() << " cells written\n";
}

void cmd_bootstrap(const RunConfig& cfg) {
  Dataset d = load_input(cfg.input, cfg.k);
  ModelSpec spec = make_spec(cfg, d.K);
  FunctionalSpec fspec = parse_functional(cfg.functional, d.K);
  BootstrapOptions opts = bootstrap_options(cfg);
  EstimatorConfig est = estimator_config(cfg);
  CiResult ci;
  if (cfg.alpha == "mcar") {
    BootstrapRun run = run_bootstrap(d, spec, est, fspec, {TiltSpec::constant(0.0, d.K)}, opts);
    ci = mcar_ci(run);
  } else {
    ci = bootstrap_ci(d, spec, est, fspec, parse_tilt(cfg.alpha, d.K), opts);
  }
  json j;
  j["analysis"] = cfg.alpha;
  j["functional"] = cfg.functional;
  j["estimate"] = ci.estimate;
  j["se"] = ci.se;
  j["lower"] = ci.lower;
  j["upper"] = ci.upper;
  j["t_star"] = ci.t_star;
  j["B"] = ci.B;
  write_text_file(fs::path(cfg.out) / "ci.json", j.dump(2) + "\n");
  std::cout << "bootstrap: " << cfg.alpha << " estimate=" << fmt(ci.estimate) << " ["
            << fmt(ci.lower) << ", " << fmt(ci.upper) << "]\n";
}

void cmd_diagnose(const RunConfig& cfg) {
  Dataset d = load_input(cfg.input, cfg.k);
  ModelSpec spec = make_spec(cfg, d.K);
  if (cfg.alpha_grid.empty()) throw ConfigError("diagnose needs --alpha-grid lo:hi:step");
  std::vector<double> alphas = parse_alpha_grid(cfg.alpha_grid);
  auto rows = alpha_diagnostic(d, spec, estimator_config(cfg), alphas);
  Table t;
  t.header = {"k", "alpha", "p_miss", "p_obs", "percent_difference", "defined"};
  for (const auto& r : rows) {
    t.add_row({std::to_string(r.k), fmt(r.alpha), fmt(r.p_miss), fmt(r.p_obs),
               fmt(r.percent_difference), r.defined ? "1" : "0"});
  }
  write_table(t, cfg, "diagnostic");
  std::cout << "diagnose: " << rows.size() << " rows written\n";
}

void cmd_simulate(const RunConfig& cfg) {
  ObservedLaw law;
  if (!cfg.law_file.empty()) {
    law = load_observed_law(cfg.law_file);
  } else {
    Dataset d = load_input(cfg.input, cfg.k);
    ModelSpec fit_spec = make_spec(cfg, d.K);
    law = fit_observed_law(d, fit_spec, estimator_config(cfg));
  }
  ModelSpec spec = ModelSpec::constant_alpha(law.K, law.m, 0.0);
  if (cfg.m != law.m) {
    // The law fixes m; an explicit mismatching --m is a config error.
    if (cfg.law_file.empty()) {
      throw ConfigError("simulate: internal m mismatch");
    }
  }
  SimulationDesign design;
  design.alphas = cfg.alpha_grid.empty() ? std::vector<double>{0.0}
                                         : parse_alpha_grid(cfg.alpha_grid);
  design.sample_sizes = parse_int_list(cfg.n_list, "n list");
  design.reps = cfg.reps;
  design.bootstrap = bootstrap_options(cfg);
  design.functional = parse_functional(cfg.functional, law.K);
  design.threads = cfg.threads <= 0 ? default_threads() : cfg.threads;
  EstimatorConfig est = estimator_config(cfg);
  auto rows = run_simulation(law, spec, est, design, cfg.seed);
  Table t;
  t.header = {"alpha", "n", "truth", "mean", "sd", "rmse", "coverage", "reps"};
  for (const auto& r : rows) {
    t.add_row({fmt(r.alpha), std::to_string(r.n), fmt(r.truth), fmt(r.mean), fmt(r.sd),
               fmt(r.rmse), fmt(r.coverage), std::to_string(r.reps)});
  }
  write_table(t, cfg, "simulation");
  std::cout << "simulate: " << rows.size() << " design rows written\n";
}

void cmd_check_model(const RunConfig& cfg) {
  if (cfg.k < 2) throw ConfigError("check-model needs --k");
  if (cfg.k > kMaxEnumK) {
    throw ConfigError("check-model: exact verification is capped at K=" +
                      std::to_string(kMaxEnumK));
  }
  ModelSpec spec = ModelSpec::constant_alpha(cfg.k, cfg.m, 1.0);
  ModelDag dag = build_full_dag(spec);
  Table t;
  t.header = {"lemma", "k", "statement", "d_separated", "max_residual", "pass"};
  bool all_pass = true;
  const double tol = 1e-10;
  for (auto which : {CiStatement::Source::Lemma1, CiStatement::Source::Lemma2}) {
    for (const auto& stmt : lemma_statements(spec, which)) {
      bool dsep = dag.dag.d_separated(stmt.x, stmt.z, stmt.s);
      double worst = 0.0;
      bool pass = true;
      for (int s = 0; s < cfg.check_seeds; ++s) {
        FullLawOracle oracle = gen_full_law(spec, mix_keys({cfg.seed, static_cast<std::uint64_t>(s)}));
        CiReport rep = verify_ci(oracle, stmt, tol);
        worst = std::max(worst, rep.max_residual);
        pass = pass && rep.pass;
      }
      all_pass = all_pass && pass;
      if (which == CiStatement::Source::Lemma2 && !dsep) all_pass = false;
      t.add_row({which == CiStatement::Source::Lemma1 ? "Lemma1" : "Lemma2",
                 std::to_string(stmt.k), stmt.describe(dag), dsep ? "1" : "0", fmt(worst),
                 pass ? "1" : "0"});
      std::cout << (pass ? "[pass] " : "[FAIL] ") << stmt.describe(dag)
                << (dsep ? "  (d-separated)" : "") << "  residual<=" << fmt(worst) << "\n";
    }
  }
  write_table(t, cfg, "check_model");
  std::cout << (all_pass ? "check-model: all statements verified\n"
                         : "check-model: FAILURES present\n");
  if (!all_pass) throw NumericError("check-model: verification failed");
}

}  // namespace

void run(const RunConfig& cfg) {
  fs::create_directories(cfg.out);
  if (cfg.command == "patterns") {
    cmd_patterns(cfg);
  } else if (cfg.command == "fit") {
    cmd_fit(cfg);
  } else if (cfg.command == "identify") {
    cmd_identify(cfg);
  } else if (cfg.command == "sensitivity") {
    cmd_sensitivity(cfg);
  } else if (cfg.command == "contour") {
    cmd_contour(cfg);
  } else if (cfg.command == "bootstrap") {
    cmd_bootstrap(cfg);
  } else if (cfg.command == "diagnose") {
    cmd_diagnose(cfg);
  } else if (cfg.command == "simulate") {
    cmd_simulate(cfg);
  } else if (cfg.command == "check-model") {
    cmd_check_model(cfg);
  } else {
    throw ConfigError("unknown command '" + cfg.command + "'");
  }
  write_manifest(cfg);
}

void replay(const std::string& manifest_path) {
  json j;
  try {
    j = json::parse(read_text_file(manifest_path));
  } catch (const IoError&) {
    throw;
  } catch (const std::exception& e) {
    throw IoError(std::string("manifest: bad JSON: ") + e.what());
  }
  if (j.value("tool", "") != "mrsens") throw ConfigError("manifest: not a mrsens manifest");
  run(config_from_json(j.at("config")));
}

}  // namespace mrsens::cli
