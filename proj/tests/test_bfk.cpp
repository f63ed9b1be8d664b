#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "specdet/bfk.hpp"

using namespace specdet;
using Cplx = std::complex<double>;

namespace {

constexpr double kPi = 3.14159265358979323846;

ProblemSpec problem(CoefficientProfile damping) {
  const double T = damping.domain_length();
  return ProblemSpec{T, std::move(damping), std::nullopt, {}};
}

std::vector<CoefficientProfile> profile_families(double T) {
  return {
      CoefficientProfile::zero(T),
      CoefficientProfile::constant(1.0, T),
      CoefficientProfile::constant(4.0, T),
      CoefficientProfile::trigonometric({{1.0, kPi / T, 0.0}}, T),
      CoefficientProfile::polynomial({0.0, 1.0 / T}, T),  // ramp x/T
  };
}

// n = 1, r = 1, a2 = c (constant), Dirichlet ends
BFKOperatorSpec scalar_operator(double c, double T, double theta) {
  BFKOperatorSpec spec;
  spec.n = 1;
  spec.r = 1;
  spec.T = T;
  spec.theta = theta;
  spec.coefficients.resize(3);
  spec.coefficients[2] = [c](double) {
    return Eigen::MatrixXd::Constant(1, 1, c);
  };
  spec.alpha = {0};
  spec.beta = {0};
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(1, 1);
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(1, 1);
  spec.boundary_b = {{id, zero}};
  spec.boundary_c = {{id, zero}};
  return spec;
}

}  // namespace

TEST_CASE("g_exponent exact rationals") {
  CHECK(g_exponent(0, 1) == Rational{-1, 4});
  CHECK(g_exponent(1, 1) == Rational{1, 4});
  CHECK(g_exponent(1, 2) == Rational{-1, 2});
}

TEST_CASE("h_det") {
  CHECK(std::abs(h_det({0}, 1) - Cplx(1.0, 0.0)) < 1e-14);
  // n = 2: w1 = e^{-i pi/4}, w2 = e^{i pi/4}
  CHECK(std::abs(h_det({0, 1}, 2) - Cplx(0.0, std::sqrt(2.0))) < 1e-14);
  CHECK(std::abs(h_det({0, 2}, 2) - Cplx(0.0, 2.0)) < 1e-14);
}

TEST_CASE("det_power_theta branch selection") {
  const Rational g{-1, 4};
  // both arguments taken at -pi for a cut just below the positive axis
  CHECK(std::abs(det_power_theta({{-1.0, 0.0}, {-1.0, 0.0}}, g, -0.1) -
                 Cplx(0.0, 1.0)) < 1e-12);
  CHECK(std::abs(det_power_theta({{1.0, 0.0}}, Rational{3, 7}, kPi / 2) -
                 Cplx(1.0, 0.0)) < 1e-14);
  // arg(-1) = +pi branch for theta = 3 pi / 2
  CHECK(std::abs(det_power_theta({{-1.0, 0.0}, {-1.0, 0.0}}, g, 3 * kPi / 2) -
                 Cplx(0.0, -1.0)) < 1e-12);
  CHECK_THROWS_AS(det_power_theta({{0.0, 0.0}}, g, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(det_power_theta({{-2.0, 0.0}}, g, kPi),
                  std::invalid_argument);
}

TEST_CASE("k_theta") {
  // squared damped wave operator: always -4, any damping
  for (const auto& a : profile_families(1.0)) {
    const auto sq = square_operator(problem(a));
    CHECK(std::abs(k_theta(sq) - Cplx(-4.0, 0.0)) < 1e-12);
  }
  // scalar Dirichlet with unit leading coefficient: 2 * 1 * 1
  CHECK(std::abs(k_theta(scalar_operator(1.0, 1.0, kPi / 2)) -
                 Cplx(2.0, 0.0)) < 1e-13);
  // r = 2 identity leading coefficient: [2]^2
  {
    BFKOperatorSpec spec = scalar_operator(1.0, 1.0, kPi / 2);
    spec.r = 2;
    spec.coefficients[2] = [](double) {
      return Eigen::MatrixXd::Identity(2, 2);
    };
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2, 2);
    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2, 2);
    spec.boundary_b = {{id, zero}};
    spec.boundary_c = {{id, zero}};
    CHECK(std::abs(k_theta(spec) - Cplx(4.0, 0.0)) < 1e-13);
  }
}

TEST_CASE("boundary_matrices block layouts") {
  {  // Dirichlet, n = 1: B = [[I,0],[0,0]], C = [[0,0],[I,0]]
    const auto sq = square_operator(problem(CoefficientProfile::zero(1.0)));
    const auto [B, C] = boundary_matrices(sq);
    Eigen::MatrixXd Bexp = Eigen::MatrixXd::Zero(4, 4);
    Bexp.block(0, 0, 2, 2).setIdentity();
    Eigen::MatrixXd Cexp = Eigen::MatrixXd::Zero(4, 4);
    Cexp.block(2, 0, 2, 2).setIdentity();
    CHECK((B - Bexp).norm() == 0.0);
    CHECK((C - Cexp).norm() == 0.0);
  }
  {  // Neumann at both ends (alpha_1 = beta_1 = 1)
    BFKOperatorSpec spec = scalar_operator(1.0, 1.0, kPi / 2);
    spec.alpha = {1};
    spec.beta = {1};
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(1, 1);
    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(1, 1);
    spec.boundary_b = {{zero, id}};
    spec.boundary_c = {{zero, id}};
    const auto [B, C] = boundary_matrices(spec);
    Eigen::MatrixXd Bexp = Eigen::MatrixXd::Zero(2, 2);
    Bexp(0, 1) = 1.0;
    Eigen::MatrixXd Cexp = Eigen::MatrixXd::Zero(2, 2);
    Cexp(1, 1) = 1.0;
    CHECK((B - Bexp).norm() == 0.0);
    CHECK((C - Cexp).norm() == 0.0);
  }
  {  // Dirichlet at 0, Neumann at T
    BFKOperatorSpec spec = scalar_operator(1.0, 1.0, kPi / 2);
    spec.alpha = {1};
    spec.beta = {0};
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(1, 1);
    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(1, 1);
    spec.boundary_b = {{zero, id}};
    spec.boundary_c = {{id, zero}};
    const auto [B, C] = boundary_matrices(spec);
    Eigen::MatrixXd Bexp = Eigen::MatrixXd::Zero(2, 2);
    Bexp(0, 1) = 1.0;
    Eigen::MatrixXd Cexp = Eigen::MatrixXd::Zero(2, 2);
    Cexp(1, 0) = 1.0;
    CHECK((B - Bexp).norm() == 0.0);
    CHECK((C - Cexp).norm() == 0.0);
  }
}

TEST_CASE("square_operator coefficient matrices") {
  {
    const auto sq = square_operator(problem(CoefficientProfile::zero(1.0)));
    CHECK((sq.coefficients[2](0.3) + Eigen::MatrixXd::Identity(2, 2)).norm() ==
          0.0);
    CHECK(sq.coefficients[0](0.3).norm() == 0.0);
    CHECK(!sq.coefficients[1]);  // identically zero, kept exact
  }
  {
    const auto sq =
        square_operator(problem(CoefficientProfile::constant(1.0, 1.0)));
    Eigen::MatrixXd a2(2, 2), a0(2, 2);
    a2 << -1, 0, 2, -1;
    a0 << 0, -2, 0, 4;
    CHECK((sq.coefficients[2](0.5) - a2).norm() == 0.0);
    CHECK((sq.coefficients[0](0.5) - a0).norm() == 0.0);
  }
  CHECK_THROWS_AS(
      square_operator(ProblemSpec{1.0, CoefficientProfile::zero(1.0),
                                  CoefficientProfile::constant(1.0, 1.0),
                                  {}}),
      std::invalid_argument);
}

TEST_CASE("cauchy_matrix_solution: closed forms") {
  {  // a = 1, T = 1: y1(1) = [[1, 1/3], [0, 1]]
    const auto sq =
        square_operator(problem(CoefficientProfile::constant(1.0, 1.0)));
    const Eigen::MatrixXcd Y = cauchy_matrix_solution(sq);
    CHECK(std::abs(Y(0, 2) - Cplx(1.0, 0.0)) < 1e-10);
    CHECK(std::abs(Y(0, 3) - Cplx(1.0 / 3.0, 0.0)) < 1e-10);
    CHECK(std::abs(Y(1, 2)) < 1e-12);
    CHECK(std::abs(Y(1, 3) - Cplx(1.0, 0.0)) < 1e-10);
  }
  {  // a = 0: y1(T) = T I
    const auto sq =
        square_operator(problem(CoefficientProfile::zero(2.0)));
    const Eigen::MatrixXcd Y = cauchy_matrix_solution(sq);
    CHECK(std::abs(Y(0, 2) - Cplx(2.0, 0.0)) < 1e-10);
    CHECK(std::abs(Y(0, 3)) < 1e-10);
    CHECK(std::abs(Y(1, 3) - Cplx(2.0, 0.0)) < 1e-10);
  }
  {  // det y1(T) = T^2 for any damping
    const auto sq = square_operator(
        problem(CoefficientProfile::trigonometric({{1.0, kPi / 2.0, 0.0}},
                                                  2.0)));
    const Eigen::MatrixXcd Y = cauchy_matrix_solution(sq);
    const Cplx det = Y.block(0, 2, 2, 2).determinant();
    CHECK(std::abs(det - Cplx(4.0, 0.0)) < 1e-8);
  }
}

TEST_CASE("generic Cauchy integration agrees with the reduced fast path") {
  for (const auto& a : profile_families(1.0)) {
    const auto sq = square_operator(problem(a));
    const Eigen::MatrixXcd fast = cauchy_matrix_solution(sq);
    const Eigen::MatrixXcd generic = cauchy_matrix_solution_generic(sq);
    CHECK((fast - generic).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("y1_closed_form: quadrature oracle") {
  {
    const auto spec = problem(CoefficientProfile::zero(1.0));
    const Eigen::Matrix2d m = y1_closed_form(spec, 0.7);
    CHECK(m(0, 0) == 0.7);
    CHECK(m(0, 1) == 0.0);
    CHECK(m(1, 0) == 0.0);
  }
  {
    const auto spec = problem(CoefficientProfile::constant(1.0, 1.0));
    const Eigen::Matrix2d m = y1_closed_form(spec, 1.0);
    CHECK(m(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  }
  // cross-check against the ODE route for every profile family
  for (const auto& a : profile_families(1.0)) {
    const auto spec = problem(a);
    const auto sq = square_operator(spec);
    const Eigen::MatrixXcd Y = cauchy_matrix_solution(sq);
    const Eigen::Matrix2d closed = y1_closed_form(spec, 1.0);
    CHECK((Y.block(0, 2, 2, 2) - closed.cast<Cplx>()).cwiseAbs().maxCoeff() <
          1e-8);
  }
}

TEST_CASE("det_BYC") {
  {  // Dirichlet squared operator: det y1(T) = T^2
    for (double T : {1.0, 3.0}) {
      const auto sq =
          square_operator(problem(CoefficientProfile::constant(2.0, T)));
      const auto Y = cauchy_matrix_solution(sq);
      CHECK(std::abs(det_BYC(sq, Y) - Cplx(T * T, 0.0)) < 1e-8 * T * T);
    }
  }
  {  // singular block pattern: B Y - C = [[I, 0], [-I, 0]]
    const auto sq = square_operator(problem(CoefficientProfile::zero(1.0)));
    const Eigen::MatrixXcd Y = Eigen::MatrixXcd::Identity(4, 4);
    CHECK(std::abs(det_BYC(sq, Y)) < 1e-14);
  }
}

TEST_CASE("bfk_determinant: Det A = -4 T^2, damping independent") {
  for (double T : {1.0, 2.0}) {
    for (const auto& a : profile_families(T)) {
      const auto sq = square_operator(problem(a));
      const auto res = bfk_determinant(sq);
      CHECK(std::abs(res.value - Cplx(-4.0 * T * T, 0.0)) <=
            1e-7 * 4.0 * T * T);
      // the trace factor must be exactly one when a_{2n-1} vanishes
      CHECK(res.diagnostics.at("trace_factor_re") == 1.0);
      CHECK(res.diagnostics.at("trace_factor_im") == 0.0);
    }
  }
}

TEST_CASE("bfk_run_report carries the pieces") {
  const auto sq =
      square_operator(problem(CoefficientProfile::constant(3.0, 2.0)));
  const auto rep = bfk_run_report(sq);
  CHECK(std::abs(rep.k_theta - Cplx(-4.0, 0.0)) < 1e-12);
  CHECK(rep.trace_factor == Cplx(1.0, 0.0));
  CHECK(std::abs(rep.det_byc - Cplx(4.0, 0.0)) < 1e-8);
  CHECK(std::abs(rep.determinant - Cplx(-16.0, 0.0)) < 1e-6);
  CHECK(rep.theta == -2e-3);
  CHECK(rep.profile_hash.size() == 16);
}

TEST_CASE("validate rejects malformed operators") {
  auto spec = scalar_operator(1.0, 1.0, kPi / 2);
  CHECK_NOTHROW(validate(spec));
  {
    auto bad = spec;
    bad.coefficients[2] = [](double) {
      return Eigen::MatrixXd::Zero(1, 1);  // singular leading coefficient
    };
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  }
  {
    auto bad = spec;
    bad.theta = 0.0;  // cut ray through spec(a2) = {1}
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  }
  {
    auto bad = spec;
    bad.boundary_b = {{Eigen::MatrixXd::Zero(1, 1),
                       Eigen::MatrixXd::Zero(1, 1)}};
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  }
  {
    auto bad = spec;
    bad.alpha = {2};  // out of range for n = 1
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  }
}
