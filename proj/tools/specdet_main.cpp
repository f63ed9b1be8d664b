// specdet: spectra and zeta-regularized determinants of the damped wave
// operator on an interval. Single-JSON-document configs, deterministic
// outputs. Commands: spectrum | det | verify.

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "specdet/bfk.hpp"
#include "specdet/eigensolver.hpp"
#include "specdet/io.hpp"
#include "specdet/zeta.hpp"

namespace {

using nlohmann::json;
using namespace specdet;

constexpr double kPi = 3.14159265358979323846;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
    }
  }
}

double require_number(const json& j, const std::string& key,
                      const std::string& where) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw ConfigError("missing or non-numeric \"" + key + "\" in " + where);
  }
  return j[key].get<double>();
}

CoefficientProfile parse_profile(const json& j, double T,
                                 const std::string& where) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw ConfigError(where + ": profile must be a tagged object");
  }
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "constant") {
    reject_unknown_keys(j, {"kind", "value"}, where);
    return CoefficientProfile::constant(require_number(j, "value", where), T);
  }
  if (kind == "polynomial") {
    reject_unknown_keys(j, {"kind", "coefficients"}, where);
    if (!j.contains("coefficients") || !j["coefficients"].is_array()) {
      throw ConfigError(where + ": polynomial needs \"coefficients\"");
    }
    std::vector<double> c;
    for (const auto& v : j["coefficients"]) c.push_back(v.get<double>());
    return CoefficientProfile::polynomial(std::move(c), T);
  }
  if (kind == "trig") {
    reject_unknown_keys(j, {"kind", "terms"}, where);
    if (!j.contains("terms") || !j["terms"].is_array()) {
      throw ConfigError(where + ": trig needs \"terms\"");
    }
    std::vector<TrigTerm> terms;
    for (const auto& t : j["terms"]) {
      if (!t.is_array() || t.size() != 3) {
        throw ConfigError(where +
                          ": trig terms are [amplitude, frequency, phase]");
      }
      terms.push_back({t[0].get<double>(), t[1].get<double>(),
                       t[2].get<double>()});
    }
    return CoefficientProfile::trigonometric(std::move(terms), T);
  }
  if (kind == "sampled") {
    reject_unknown_keys(j, {"kind", "xs", "ys"}, where);
    if (!j.contains("xs") || !j.contains("ys")) {
      throw ConfigError(where + ": sampled needs \"xs\" and \"ys\"");
    }
    std::vector<double> xs, ys;
    for (const auto& v : j["xs"]) xs.push_back(v.get<double>());
    for (const auto& v : j["ys"]) ys.push_back(v.get<double>());
    if (!xs.empty() && std::abs(xs.back() - T) > 1e-12 * std::max(1.0, T)) {
      throw ConfigError(where + ": sampled profile must end at x = T");
    }
    return CoefficientProfile::sampled(std::move(xs), std::move(ys));
  }
  throw ConfigError(where + ": unknown profile kind \"" + kind + "\"");
}

struct RunConfig {
  double T = 1.0;
  CoefficientProfile damping = CoefficientProfile::zero(1.0);
  std::optional<CoefficientProfile> potential;
  std::optional<double> K;
  std::optional<int> N;
  std::optional<int> j_max;
  CutConvention cut = CutConvention::AboveNegativeAxis;
  std::optional<double> epsilon;
  std::vector<std::string> methods = {"bfk_lift", "closed_form_zeta"};
  Tolerances tol;
  std::string out_dir = ".";
  bool want_json = true;
  bool want_csv = true;
};

RunConfig parse_config(const json& j) {
  reject_unknown_keys(j,
                      {"T", "damping", "potential", "K", "N", "jMax", "cut",
                       "epsilon", "methods", "tol", "out"},
                      "config");
  RunConfig cfg;
  cfg.T = require_number(j, "T", "config");
  if (!(cfg.T > 0.0)) throw ConfigError("config: T must be > 0");
  if (j.contains("damping")) {
    cfg.damping = parse_profile(j["damping"], cfg.T, "damping");
  } else {
    cfg.damping = CoefficientProfile::zero(cfg.T);
  }
  if (j.contains("potential")) {
    cfg.potential = parse_profile(j["potential"], cfg.T, "potential");
  }
  if (j.contains("K")) {
    cfg.K = require_number(j, "K", "config");
    if (!(*cfg.K > 0.0)) throw ConfigError("config: K must be > 0");
  }
  if (j.contains("N")) {
    if (!j["N"].is_number_integer() || j["N"].get<long long>() < 1) {
      throw ConfigError("config: N must be a positive integer");
    }
    cfg.N = j["N"].get<int>();
  }
  if (j.contains("jMax")) {
    if (!j["jMax"].is_number_integer() || j["jMax"].get<long long>() < 1) {
      throw ConfigError("config: jMax must be a positive integer");
    }
    cfg.j_max = j["jMax"].get<int>();
  }
  if (j.contains("cut")) {
    const std::string c = j["cut"].get<std::string>();
    if (c == "above_negative_axis") {
      cfg.cut = CutConvention::AboveNegativeAxis;
    } else if (c == "below_positive_axis") {
      cfg.cut = CutConvention::BelowPositiveAxis;
    } else {
      throw ConfigError("config: unknown cut \"" + c + "\"");
    }
  }
  if (j.contains("epsilon")) {
    cfg.epsilon = require_number(j, "epsilon", "config");
    if (!(*cfg.epsilon > 0.0)) throw ConfigError("config: epsilon must be > 0");
  }
  if (j.contains("methods")) {
    if (!j["methods"].is_array()) throw ConfigError("config: methods is a list");
    cfg.methods.clear();
    for (const auto& m : j["methods"]) {
      const std::string name = m.get<std::string>();
      if (name != "bfk_lift" && name != "closed_form_zeta" &&
          name != "relative_product" && name != "potential_cauchy") {
        throw ConfigError("config: unknown method \"" + name + "\"");
      }
      cfg.methods.push_back(name);
    }
    if (cfg.methods.empty()) throw ConfigError("config: methods is empty");
  }
  if (j.contains("tol")) {
    reject_unknown_keys(j["tol"], {"ode", "root"}, "tol");
    if (j["tol"].contains("ode")) {
      cfg.tol.ode_tol = require_number(j["tol"], "ode", "tol");
    }
    if (j["tol"].contains("root")) {
      cfg.tol.root_tol = require_number(j["tol"], "root", "tol");
    }
    if (!(cfg.tol.ode_tol > 0.0) || !(cfg.tol.root_tol > 0.0)) {
      throw ConfigError("config: tolerances must be > 0");
    }
  }
  if (j.contains("out")) {
    reject_unknown_keys(j["out"], {"dir", "formats"}, "out");
    if (j["out"].contains("dir")) {
      cfg.out_dir = j["out"]["dir"].get<std::string>();
    }
    if (j["out"].contains("formats")) {
      cfg.want_json = cfg.want_csv = false;
      for (const auto& f : j["out"]["formats"]) {
        const std::string name = f.get<std::string>();
        if (name == "json") {
          cfg.want_json = true;
        } else if (name == "csv") {
          cfg.want_csv = true;
        } else {
          throw ConfigError("config: unknown format \"" + name + "\"");
        }
      }
    }
  }
  return cfg;
}

ProblemSpec problem_from(const RunConfig& cfg) {
  ProblemSpec spec{cfg.T, cfg.damping, cfg.potential, cfg.tol};
  return spec;
}

void write_file(const std::string& dir, const std::string& name,
                const std::string& content) {
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

void print_error_json(const std::string& stage, const std::string& message) {
  JsonWriter w;
  w.begin_object();
  w.key("error").begin_object();
  w.key("stage").string(stage);
  w.key("message").string(message);
  w.end_object();
  w.end_object();
  std::cout << w.str() << "\n";
}

// ---------------------------------------------------------------------------
// spectrum
// ---------------------------------------------------------------------------

int cmd_spectrum(const RunConfig& cfg, bool quiet) {
  if (!cfg.K) throw ConfigError("spectrum: config must set K");
  const ProblemSpec spec = problem_from(cfg);
  const Spectrum sp = find_spectrum(spec, *cfg.K);

  if (cfg.want_csv) write_file(cfg.out_dir, "spectrum.csv", spectrum_to_csv(sp));
  if (cfg.want_json) {
    write_file(cfg.out_dir, "spectrum.json", spectrum_to_json(sp));
  }
  if (!cfg.potential) {
    auto rows = asymptotic_residuals(sp, spec);
    if (cfg.j_max) {
      std::erase_if(rows, [&](const auto& r) { return r.j > *cfg.j_max; });
    }
    write_file(cfg.out_dir, "residuals.csv", residuals_to_csv(rows));
  }
  if (!quiet) {
    std::cout << "spectrum: " << sp.records.size() << " records, card_I1="
              << sp.card_I1 << ", card_I2=" << sp.card_I2 << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// det
// ---------------------------------------------------------------------------

bool wants(const RunConfig& cfg, const std::string& m) {
  for (const auto& x : cfg.methods) {
    if (x == m) return true;
  }
  return false;
}

int cmd_det(const RunConfig& cfg, bool quiet) {
  const ProblemSpec spec = problem_from(cfg);
  if (wants(cfg, "potential_cauchy") && !cfg.potential) {
    throw ConfigError("det: potential_cauchy requires a potential");
  }
  if ((wants(cfg, "bfk_lift") || wants(cfg, "relative_product")) &&
      cfg.potential) {
    throw ConfigError(
        "det: bfk_lift/relative_product are defined for the pure damping "
        "problem");
  }
  if (wants(cfg, "relative_product") && !cfg.N) {
    throw ConfigError("det: relative_product requires N");
  }

  const bool need_spectrum =
      wants(cfg, "bfk_lift") || wants(cfg, "relative_product");
  std::optional<Spectrum> sp;
  if (need_spectrum) {
    double K = cfg.K.value_or(8.5 * kPi / cfg.T);
    if (cfg.N) K = std::max(K, (*cfg.N + 0.6) * kPi / cfg.T);
    sp = find_spectrum(spec, K);
  }
  const double epsilon =
      cfg.epsilon ? *cfg.epsilon
                  : (sp ? choose_epsilon(*sp, cfg.cut) : 1e-3);
  const BranchCut cut{cfg.cut, epsilon};

  std::vector<std::pair<std::string, DeterminantResult>> results;
  std::optional<BFKRunReport> report;
  for (const auto& m : cfg.methods) {
    if (m == "closed_form_zeta") {
      results.emplace_back(m, det_H0_closed_form(cfg.T, cut));
    } else if (m == "bfk_lift") {
      const BFKOperatorSpec sq = square_operator(spec, epsilon);
      report = bfk_run_report(sq);
      results.emplace_back(
          m, lift_determinant(report->determinant, sp->card_I2, cut));
    } else if (m == "relative_product") {
      results.emplace_back(m, relative_determinant(*sp, spec, *cfg.N));
    } else if (m == "potential_cauchy") {
      results.emplace_back(m, potential_determinant(spec, cut));
    }
  }

  JsonWriter w;
  w.begin_object();
  w.key("T").number(cfg.T);
  w.key("cut").string(to_string(cfg.cut));
  w.key("epsilon").number(epsilon);
  if (sp) w.key("card_I2").integer(sp->card_I2);
  w.key("methods").begin_object();
  for (const auto& [name, res] : results) {
    w.key(name);
    write_determinant_result(w, res);
  }
  w.end_object();
  w.key("deltas").begin_object();
  for (std::size_t i = 0; i < results.size(); ++i) {
    for (std::size_t k = i + 1; k < results.size(); ++k) {
      w.key(results[i].first + "_vs_" + results[k].first)
          .number(std::abs(results[i].second.value - results[k].second.value));
    }
  }
  w.end_object();
  w.end_object();
  write_file(cfg.out_dir, "determinant.json", w.str() + "\n");
  if (report) {
    write_file(cfg.out_dir, "bfk_report.json", bfk_report_to_json(*report));
  }
  if (!quiet) {
    for (const auto& [name, res] : results) {
      std::cout << name << ": " << res.value.real();
      if (res.value.imag() != 0.0) std::cout << " + " << res.value.imag() << "i";
      std::cout << "\n";
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

int cmd_verify(const RunConfig& cfg, bool quiet) {
  const ProblemSpec spec = problem_from(cfg);
  std::vector<Check> checks;
  auto add = [&](const std::string& name, bool pass,
                 const std::string& detail) {
    checks.push_back({name, pass, detail});
    if (!quiet) {
      std::cout << (pass ? "[pass] " : "[FAIL] ") << name << ": " << detail
                << "\n";
    }
  };

  // F(0) = T exactly when no potential; otherwise F(0) is the Cauchy value
  // y(T), which must stay away from zero.
  {
    const Complex f0 = characteristic(spec, Complex(0, 0)).unscaled();
    if (!cfg.potential) {
      const double err = std::abs(f0 - Complex(cfg.T, 0.0));
      add("f_at_zero_equals_T", err <= 1e-9 * std::max(1.0, cfg.T),
          "err=" + format_shortest(err));
    } else {
      add("no_zero_mode", std::abs(f0) > 1e-10 * std::max(1.0, cfg.T),
          "|F(0)|=" + format_shortest(std::abs(f0)));
    }
  }

  // conjugate symmetry of F at fixed pseudo-random points
  {
    std::uint64_t state = 0x9e3779b97f4a7c15ULL;
    auto next = [&state]() {
      state ^= state << 13;
      state ^= state >> 7;
      state ^= state << 17;
      return 6.0 * (static_cast<double>(state % 1000003) / 1000003.0) - 3.0;
    };
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const Complex lam(next(), next());
      const Complex a = characteristic(spec, lam).unscaled();
      const Complex b = characteristic(spec, std::conj(lam)).unscaled();
      worst = std::max(worst, std::abs(b - std::conj(a)) /
                                  std::max(1.0, std::abs(a)));
    }
    add("conjugate_symmetry", worst <= 1e-10, "worst=" + format_shortest(worst));
  }

  // spectrum-level invariants
  {
    const double K = cfg.K.value_or(8.5 * kPi / cfg.T);
    const Spectrum sp = find_spectrum(spec, K);
    // parity holds without a potential, and with one only when the
    // right-hand-side operator is negative definite
    const bool parity_applies =
        !cfg.potential || rhs_negative_definiteness(spec).first;
    add("card_I2_even", !parity_applies || sp.card_I2 % 2 == 0,
        "card_I2=" + std::to_string(sp.card_I2) +
            (parity_applies ? "" : " (parity not required)"));

    if (!cfg.potential) {
      auto rows = asymptotic_residuals(sp, spec);
      std::erase_if(rows, [](const auto& r) { return r.j < 5; });
      if (rows.size() >= 3) {
        const bool sampled =
            cfg.damping.kind() == CoefficientProfile::Kind::Sampled;
        const double thresh =
            0.05 * (1.0 + max_abs_bound(cfg.damping)) * (sampled ? 4.0 : 1.0);
        const double noise = 1e-6;
        double worst = 0.0;
        for (const auto& r : rows) worst = std::max(worst, r.re_residual);
        const bool decays = rows.back().re_residual <=
                                rows.front().re_residual + noise ||
                            worst <= noise;
        add("asymptotic_residual_decay", worst <= thresh && decays,
            "worst_re=" + format_shortest(worst));
      } else {
        add("asymptotic_residual_decay", true, "skipped: strip too low");
      }
    }

    if (!cfg.potential) {
      const double epsilon = cfg.epsilon.value_or(choose_epsilon(sp, cfg.cut));
      const BranchCut cut{cfg.cut, epsilon};
      const BFKOperatorSpec sq = square_operator(spec, epsilon);

      const Eigen::MatrixXcd Y = cauchy_matrix_solution(sq);
      const Eigen::Matrix2d y1 = y1_closed_form(spec, cfg.T);
      const double block_err =
          (Y.block(0, 2, 2, 2) - y1.cast<std::complex<double>>()).cwiseAbs()
              .maxCoeff();
      const std::complex<double> dety1 =
          Y.block(0, 2, 2, 2).determinant();
      const double det_err = std::abs(dety1 - cfg.T * cfg.T);
      add("cauchy_matches_closed_form", block_err <= 1e-8,
          "max_entry_err=" + format_shortest(block_err));
      add("det_y1_equals_T_squared",
          det_err <= 1e-8 * std::max(1.0, cfg.T * cfg.T),
          "err=" + format_shortest(det_err));

      const DeterminantResult detA = bfk_determinant(sq);
      const double a_err =
          std::abs(detA.value - std::complex<double>(-4.0 * cfg.T * cfg.T, 0));
      add("det_A_equals_minus_4T2", a_err <= 1e-7 * 4.0 * cfg.T * cfg.T,
          "err=" + format_shortest(a_err));

      const DeterminantResult lifted =
          lift_determinant(detA.value, sp.card_I2, cut);
      const DeterminantResult closed = det_H0_closed_form(cfg.T, cut);
      const double x_err = std::abs(lifted.value - closed.value);
      add("cross_method_agreement",
          x_err <= 1e-6 * std::abs(closed.value),
          "delta=" + format_shortest(x_err));
    } else {
      const DeterminantResult pot = potential_determinant(spec);
      add("potential_determinant_defined", std::abs(pot.value) > 0.0,
          "value=" + format_shortest(pot.value.real()));
    }
  }

  bool all = true;
  for (const auto& c : checks) all = all && c.pass;

  JsonWriter w;
  w.begin_object();
  w.key("checks").begin_array();
  for (const auto& c : checks) {
    w.begin_object();
    w.key("name").string(c.name);
    w.key("pass").boolean(c.pass);
    w.key("detail").string(c.detail);
    w.end_object();
  }
  w.end_array();
  w.key("all_pass").boolean(all);
  w.end_object();
  write_file(cfg.out_dir, "verify.json", w.str() + "\n");
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectra and zeta-regularized determinants of the damped "
               "wave operator on an interval"};
  std::string command, config_path, out_dir;
  bool quiet = false;
  app.add_option("--command", command, "spectrum | det | verify")->required();
  app.add_option("--config", config_path, "path to the JSON run config")
      ->required();
  app.add_option("--out", out_dir, "output directory (overrides config)");
  app.add_flag("--quiet", quiet, "suppress progress output");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    print_error_json("usage", e.what());
    return 2;
  }

  RunConfig cfg;
  try {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open config " + config_path);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config parse: ") + e.what());
    }
    cfg = parse_config(j);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (command != "spectrum" && command != "det" && command != "verify") {
      throw ConfigError("unknown command \"" + command + "\"");
    }
  } catch (const ConfigError& e) {
    print_error_json("config", e.what());
    return 2;
  }

  try {
    if (command == "spectrum") return cmd_spectrum(cfg, quiet);
    if (command == "det") return cmd_det(cfg, quiet);
    return cmd_verify(cfg, quiet);
  } catch (const ConfigError& e) {
    print_error_json("config", e.what());
    return 2;
  } catch (const std::exception& e) {
    print_error_json(command, e.what());
    return 3;
  }
}
