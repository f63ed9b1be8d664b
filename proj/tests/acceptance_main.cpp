// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criterion 10 additionally drives the CLI binary (path in argv[1])
// to check byte-determinism of its outputs.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "specdet/bfk.hpp"
#include "specdet/eigensolver.hpp"
#include "specdet/io.hpp"
#include "specdet/zeta.hpp"

using namespace specdet;
using Cplx = std::complex<double>;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

std::vector<std::pair<std::string, CoefficientProfile>> profile_families(
    double T) {
  return {
      {"zero", CoefficientProfile::zero(T)},
      {"const1", CoefficientProfile::constant(1.0, T)},
      {"const4", CoefficientProfile::constant(4.0, T)},
      {"sin", CoefficientProfile::trigonometric({{1.0, kPi / T, 0.0}}, T)},
      {"ramp", CoefficientProfile::polynomial({0.0, 1.0 / T}, T)},
  };
}

ProblemSpec problem(const CoefficientProfile& damping,
                    Tolerances tol = Tolerances{}) {
  return ProblemSpec{damping.domain_length(), damping, std::nullopt, tol};
}

// closed-form pairs for constant damping, j = 1..n
struct OraclePair {
  bool real;
  Cplx upper;          // complex regime
  double lo, hi;       // real regime
};
OraclePair oracle_pair(double a, double T, int j) {
  const double k = j * kPi / T;
  if (k * k >= a * a) {
    return {false, Cplx(-a, std::sqrt(k * k - a * a)), 0, 0};
  }
  const double s = std::sqrt(a * a - k * k);
  return {true, Cplx(0, 0), -a - s, -a + s};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// -------------------------------------------------------------------------

Outcome criterion1() {
  Outcome out;
  (void)det_H0_closed_form(1.0, BranchCut{});  // warm caches and allocator
  const auto t0 = std::chrono::steady_clock::now();
  for (double T : {0.5, 1.0, kPi}) {
    for (auto conv : {CutConvention::AboveNegativeAxis,
                      CutConvention::BelowPositiveAxis}) {
      const auto res = det_H0_closed_form(T, BranchCut{conv, 1e-3});
      const double expected =
          conv == CutConvention::AboveNegativeAxis ? 2.0 * T : -2.0 * T;
      const double err = std::abs(res.value - Cplx(expected, 0.0));
      out.require(err <= 1e-12 * std::max(1.0, std::abs(expected)),
                  "T=" + format_shortest(T) + " err=" + format_shortest(err));
    }
  }
  const double ms = ms_since(t0);
  out.require(ms < 1.0, "runtime " + format_shortest(ms) + " ms >= 1 ms");
  out.detail = "max err <= 1e-12, " + format_shortest(ms) + " ms";
  return out;
}

Outcome criterion2() {
  Outcome out;
  double worst = 0.0;
  for (const auto& [name, a] : profile_families(1.0)) {
    const auto sq = square_operator(problem(a));
    const double err = std::abs(k_theta(sq) - Cplx(-4.0, 0.0));
    worst = std::max(worst, err);
    out.require(err <= 1e-12, name + " err=" + format_shortest(err));
  }
  if (out.pass) out.detail = "worst |K_theta + 4| = " + format_shortest(worst);
  return out;
}

Outcome criterion3() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  double worst_block = 0.0, worst_det = 0.0;
  for (double T : {1.0, 2.0}) {
    for (const auto& [name, a] : profile_families(T)) {
      const auto spec = problem(a);
      const auto sq = square_operator(spec);
      const Eigen::MatrixXcd Y = cauchy_matrix_solution(sq);
      const Eigen::Matrix2d closed = y1_closed_form(spec, T);
      const double block_err =
          (Y.block(0, 2, 2, 2) - closed.cast<Cplx>()).cwiseAbs().maxCoeff();
      const Cplx dety1 = Y.block(0, 2, 2, 2).determinant();
      const double det_err = std::abs(dety1 - Cplx(T * T, 0.0)) / (T * T);
      worst_block = std::max(worst_block, block_err);
      worst_det = std::max(worst_det, det_err);
      out.require(block_err <= 1e-8, name + " block err " +
                                         format_shortest(block_err));
      out.require(det_err <= 1e-8,
                  name + " det rel err " + format_shortest(det_err));
    }
  }
  const double ms = ms_since(t0);
  out.require(ms < 1000.0, "runtime " + format_shortest(ms) + " ms >= 1 s");
  if (out.pass) {
    out.detail = "worst block err " + format_shortest(worst_block) +
                 ", worst det rel err " + format_shortest(worst_det) + ", " +
                 format_shortest(ms) + " ms";
  }
  return out;
}

Outcome criterion4() {
  Outcome out;
  double worst = 0.0;
  for (double T : {1.0, 2.0}) {
    for (const auto& [name, a] : profile_families(T)) {
      const auto res = bfk_determinant(square_operator(problem(a)));
      const double rel =
          std::abs(res.value - Cplx(-4.0 * T * T, 0.0)) / (4.0 * T * T);
      worst = std::max(worst, rel);
      out.require(rel <= 1e-7, name + " T=" + format_shortest(T) +
                                   " rel err " + format_shortest(rel));
    }
  }
  if (out.pass) out.detail = "worst rel err " + format_shortest(worst);
  return out;
}

Outcome criterion5() {
  Outcome out;
  double worst = 0.0;
  bool saw_card_2 = false;
  for (const auto& [name, a] : profile_families(1.0)) {
    const auto spec = problem(a);
    const auto det_a = bfk_determinant(square_operator(spec));
    const auto sp = find_spectrum(spec, 7.0);
    if (sp.card_I2 == 2) saw_card_2 = true;
    const auto lifted =
        lift_determinant(det_a.value, sp.card_I2,
                         BranchCut{CutConvention::AboveNegativeAxis, 1e-3});
    const double rel = std::abs(lifted.value - Cplx(2.0, 0.0)) / 2.0;
    worst = std::max(worst, rel);
    out.require(rel <= 1e-6, name + " rel err " + format_shortest(rel));
  }
  out.require(saw_card_2, "no profile exercised card_I2 = 2");
  if (out.pass) out.detail = "worst rel err " + format_shortest(worst);
  return out;
}

Outcome criterion6(std::vector<int>& card_i2_log) {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  const Tolerances tight{1e-12, 1e-10};
  double worst = 0.0;
  for (double a : {1.0, 4.0}) {
    const auto spec = problem(CoefficientProfile::constant(a, 1.0), tight);
    const Spectrum sp = find_spectrum(spec, 25.5 * kPi);
    card_i2_log.push_back(sp.card_I2);
    if (a == 4.0) {
      out.require(sp.card_I2 == 2,
                  "a=4 card_I2=" + std::to_string(sp.card_I2));
    }
    std::vector<Cplx> uppers;
    std::vector<double> reals;
    for (const auto& r : sp.records) {
      if (r.cls == EigenvalueClass::Upper) {
        for (int m = 0; m < r.multiplicity; ++m) uppers.push_back(r.value);
      }
      if (r.cls == EigenvalueClass::RealPositive ||
          r.cls == EigenvalueClass::RealNegative) {
        for (int m = 0; m < r.multiplicity; ++m)
          reals.push_back(r.value.real());
      }
    }
    std::sort(reals.begin(), reals.end());
    std::size_t iu = 0;
    for (int j = 1; j <= 25; ++j) {
      const auto pair = oracle_pair(a, 1.0, j);
      if (pair.real) {
        double best_lo = 1e9, best_hi = 1e9;
        for (double v : reals) {
          best_lo = std::min(best_lo, std::abs(v - pair.lo));
          best_hi = std::min(best_hi, std::abs(v - pair.hi));
        }
        worst = std::max({worst, best_lo, best_hi});
        out.require(best_lo <= 1e-9 && best_hi <= 1e-9,
                    "a=" + format_shortest(a) + " real pair j=" +
                        std::to_string(j));
      } else {
        if (iu >= uppers.size()) {
          out.require(false, "missing pair j=" + std::to_string(j));
          break;
        }
        const double err = std::abs(uppers[iu++] - pair.upper);
        worst = std::max(worst, err);
        out.require(err <= 1e-9, "a=" + format_shortest(a) + " j=" +
                                     std::to_string(j) + " err=" +
                                     format_shortest(err));
      }
    }
  }
  const double ms = ms_since(t0);
  out.require(ms < 30000.0, "runtime " + format_shortest(ms) + " ms >= 30 s");
  if (out.pass) {
    out.detail = "worst |dlambda| = " + format_shortest(worst) + ", " +
                 format_shortest(ms / 1000.0) + " s";
  }
  return out;
}

Outcome criterion7(std::vector<int>& card_i2_log) {
  Outcome out;
  const auto spec =
      problem(CoefficientProfile::trigonometric({{1.0, kPi, 0.0}}, 1.0));
  const Spectrum sp = find_spectrum(spec, 25.5 * kPi);
  card_i2_log.push_back(sp.card_I2);
  auto rows = asymptotic_residuals(sp, spec);
  std::erase_if(rows, [](const auto& r) { return r.j < 5 || r.j > 25; });
  out.require(rows.size() == 21, "expected j = 5..25, got " +
                                     std::to_string(rows.size()) + " rows");
  if (!out.pass) return out;

  double worst_re = 0.0;
  for (const auto& r : rows) worst_re = std::max(worst_re, r.re_residual);
  out.require(worst_re <= 0.05,
              "worst |Re mu_j + 2/pi| = " + format_shortest(worst_re));
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    out.require(rows[i + 1].re_residual <=
                    rows[i].re_residual * 1.05 + 1e-10,
                "Re residual trend broken at j=" + std::to_string(rows[i].j));
  }
  out.require(rows.back().re_residual < rows.front().re_residual,
              "Re residual did not decrease overall");

  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const double ratio = rows[i + 1].im_residual /
                         std::max(rows[i].im_residual, 1e-300);
    const double j = rows[i].j;
    const double target = (j / (j + 1.0)) * (j / (j + 1.0));
    out.require(ratio >= target / 3.0 && ratio <= target * 3.0,
                "Im ratio at j=" + std::to_string(rows[i].j) + " is " +
                    format_shortest(ratio));
  }
  if (out.pass) {
    out.detail = "worst Re residual " + format_shortest(worst_re) +
                 ", Im ratios within factor 3 of (j/(j+1))^2";
  }
  return out;
}

Outcome criterion8(std::vector<int>& card_i2_log) {
  Outcome out;
  {  // constant a = 1, N = 50: exact pair-product identity
    const auto spec = problem(CoefficientProfile::constant(1.0, 1.0));
    const Spectrum sp = find_spectrum(spec, 50.6 * kPi);
    card_i2_log.push_back(sp.card_I2);
    const auto res = relative_determinant(sp, spec, 50);
    const double err = std::abs(res.value - Cplx(2.0, 0.0));
    out.require(err <= 1e-7, "a=1 N=50 err=" + format_shortest(err));
    if (out.pass) out.detail = "const err " + format_shortest(err);
  }
  {  // sin(pi x), N = 200: empirical convergence, loose tolerance
    const auto spec =
        problem(CoefficientProfile::trigonometric({{1.0, kPi, 0.0}}, 1.0),
                Tolerances{1e-8, 1e-6});
    const Spectrum sp = find_spectrum(spec, 200.6 * kPi);
    card_i2_log.push_back(sp.card_I2);
    const auto res = relative_determinant(sp, spec, 200);
    const double err = std::abs(res.value - Cplx(2.0, 0.0));
    out.require(err <= 1e-2, "sin N=200 err=" + format_shortest(err));
    out.require(res.diagnostics.count("tail_estimate") == 1 &&
                    res.diagnostics.at("tail_estimate") > 0.0,
                "tail estimate missing from diagnostics");
    if (out.pass) {
      out.detail += ", sin err " + format_shortest(err) + ", tail " +
                    format_shortest(res.diagnostics.at("tail_estimate"));
    }
  }
  return out;
}

Outcome criterion9() {
  Outcome out;
  auto with_potential = [](double b) {
    return ProblemSpec{1.0, CoefficientProfile::zero(1.0),
                       CoefficientProfile::constant(b, 1.0), Tolerances{}};
  };
  const BranchCut above{CutConvention::AboveNegativeAxis, 1e-3};
  {
    const double err =
        std::abs(potential_determinant(with_potential(0.0), above).value -
                 Cplx(2.0, 0.0));
    out.require(err <= 1e-12, "b=0 err=" + format_shortest(err));
  }
  {
    const double err =
        std::abs(potential_determinant(with_potential(-1.0), above).value -
                 Cplx(2.0 * std::sinh(1.0), 0.0));
    out.require(err <= 1e-9, "b=-1 err=" + format_shortest(err));
  }
  {
    const auto res = potential_determinant(with_potential(1.0), above);
    const double err = std::abs(res.value - Cplx(2.0 * std::sin(1.0), 0.0));
    out.require(err <= 1e-9, "b=+1 err=" + format_shortest(err));
    const auto [all_neg, count] = rhs_negative_definiteness(with_potential(1.0));
    out.require(all_neg && count == 0,
                "rhs definiteness reported (" + std::to_string(all_neg) +
                    ", " + std::to_string(count) + ")");
  }
  if (out.pass) out.detail = "2T, 2 sinh(1), 2 sin(1) all within tolerance";
  return out;
}

Outcome criterion10(const std::string& cli) {
  Outcome out;
  const auto spec =
      problem(CoefficientProfile::trigonometric({{1.0, kPi, 0.0}}, 1.0));
  {  // F(0) = T
    const Cplx f0 = characteristic(spec, Cplx(0, 0)).unscaled();
    const double err = std::abs(f0 - Cplx(1.0, 0.0));
    out.require(err <= 1e-9, "F(0) err=" + format_shortest(err));
  }
  {  // conjugate symmetry at 20 random points
    std::mt19937 rng(424242);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 20; ++i) {
      const Cplx lam(u(rng), u(rng));
      const Cplx a = characteristic(spec, lam).unscaled();
      const Cplx b = characteristic(spec, std::conj(lam)).unscaled();
      out.require(std::abs(b - std::conj(a)) <=
                      1e-10 * std::max(1.0, std::abs(a)),
                  "conjugate symmetry at sample " + std::to_string(i));
    }
  }
  {  // rectangle-count additivity on 10 random boxes
    const auto cspec = problem(CoefficientProfile::constant(1.0, 1.0));
    std::mt19937 rng(1337);
    std::uniform_real_distribution<double> cx(-4.0, 2.0), cy(-9.0, 9.0);
    std::uniform_real_distribution<double> w(0.8, 4.0);
    for (int i = 0; i < 10; ++i) {
      Rect r{cx(rng), 0, cy(rng), 0};
      r.re_hi = r.re_lo + w(rng);
      r.im_hi = r.im_lo + w(rng);
      const double mx = 0.5 * (r.re_lo + r.re_hi);
      const double my = 0.5 * (r.im_lo + r.im_hi);
      const int whole = count_in_rectangle(cspec, r);
      const int parts =
          count_in_rectangle(cspec, {r.re_lo, mx, r.im_lo, my}) +
          count_in_rectangle(cspec, {mx, r.re_hi, r.im_lo, my}) +
          count_in_rectangle(cspec, {r.re_lo, mx, my, r.im_hi}) +
          count_in_rectangle(cspec, {mx, r.re_hi, my, r.im_hi});
      out.require(whole == parts, "additivity broke on box " +
                                      std::to_string(i) + " (" +
                                      std::to_string(whole) + " vs " +
                                      std::to_string(parts) + ")");
    }
  }
  if (!cli.empty()) {  // CLI byte-determinism
    const fs::path tmp = fs::temp_directory_path() / "specdet_acceptance";
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    {
      std::ofstream cfg(tmp / "config.json");
      cfg << "{\"T\": 1.0, \"damping\": {\"kind\": \"trig\", \"terms\": "
             "[[1.0, 3.14159265358979323846, 0.0]]}, \"K\": 9.0, "
             "\"out\": {\"dir\": \""
          << (tmp / "out").string() << "\"}}";
    }
    std::string first_spec, first_det;
    for (int run = 0; run < 2; ++run) {
      int rc = std::system(("'" + cli + "' --command spectrum --config " +
                            (tmp / "config.json").string() +
                            " --quiet > /dev/null 2>&1")
                               .c_str());
      out.require(WEXITSTATUS(rc) == 0, "spectrum command failed");
      rc = std::system(("'" + cli + "' --command det --config " +
                        (tmp / "config.json").string() +
                        " --quiet > /dev/null 2>&1")
                           .c_str());
      out.require(WEXITSTATUS(rc) == 0, "det command failed");
      const std::string s = slurp(tmp / "out" / "spectrum.json") +
                            slurp(tmp / "out" / "spectrum.csv") +
                            slurp(tmp / "out" / "residuals.csv");
      const std::string d = slurp(tmp / "out" / "determinant.json") +
                            slurp(tmp / "out" / "bfk_report.json");
      if (run == 0) {
        first_spec = s;
        first_det = d;
      } else {
        out.require(s == first_spec, "spectrum outputs differ between runs");
        out.require(d == first_det, "determinant outputs differ between runs");
      }
    }
    fs::remove_all(tmp);
  } else {
    out.require(false, "CLI path not provided to the acceptance binary");
  }
  if (out.pass) {
    out.detail =
        "F(0)=T, conjugate symmetry, count additivity, CLI determinism";
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  std::vector<int> card_i2_log;
  struct Row {
    int id;
    std::string name;
    Outcome outcome;
  };
  std::vector<Row> rows;
  auto run = [&rows](int id, const std::string& name, auto&& fn) {
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    rows.push_back({id, name, out});
  };

  run(1, "undamped closed form +-2T", [] { return criterion1(); });
  run(2, "BFK constant K_theta = -4", [] { return criterion2(); });
  run(3, "Cauchy determinant det y1(T) = T^2", [] { return criterion3(); });
  run(4, "squared-operator determinant -4T^2", [] { return criterion4(); });
  run(5, "main theorem: lift equals +2T", [] { return criterion5(); });
  run(6, "eigensolver matches constant-damping closed form",
      [&] { return criterion6(card_i2_log); });
  run(7, "eigenvalue asymptotics for sin(pi x)",
      [&] { return criterion7(card_i2_log); });
  run(8, "relative determinant", [&] { return criterion8(card_i2_log); });
  run(9, "potential extension 2y(T)", [] { return criterion9(); });
  run(10, "invariant suite", [&] { return criterion10(cli); });

  // card_I2 parity across every spectrum computed above
  {
    Outcome out;
    for (int c : card_i2_log) {
      out.require(c % 2 == 0, "odd card_I2 = " + std::to_string(c));
    }
    if (out.pass) {
      out.detail = "card_I2 even in all " +
                   std::to_string(card_i2_log.size()) + " spectra";
    }
    rows.push_back({11, "card_I2 parity across all runs", out});
  }

  int failures = 0;
  for (const auto& row : rows) {
    const bool ok = row.outcome.pass;
    failures += ok ? 0 : 1;
    std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << row.id << ": "
              << row.name;
    if (!row.outcome.detail.empty()) {
      std::cout << " -- " << row.outcome.detail;
    }
    std::cout << "\n";
  }
  std::cout << (failures == 0 ? "ALL CRITERIA PASSED"
                              : std::to_string(failures) + " CRITERIA FAILED")
            << "\n";
  return failures;
}
