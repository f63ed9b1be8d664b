#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "specdet/eigensolver.hpp"
#include "specdet/zeta.hpp"

namespace specdet {

// Reduced fraction; the boundary exponents g are exact rationals.
struct Rational {
  long long num = 0;
  long long den = 1;
  double value() const { return static_cast<double>(num) / den; }
};
bool operator==(const Rational& a, const Rational& b);

// r x r real-matrix-valued coefficient a_k(x); a null function means the
// coefficient is identically zero (kept exact, never integrated).
using MatrixFunction = std::function<Eigen::MatrixXd(double)>;

// Matrix differential operator sum_k a_k(x) (-i d/dx)^k of order 2n on
// [0, T] with n boundary conditions at each endpoint:
//   sum_{k<=alpha_j} b_{jk} u^(k)(T) = 0,  sum_{k<=beta_j} c_{jk} u^(k)(0) = 0.
struct BFKOperatorSpec {
  int n = 1;
  int r = 1;
  std::vector<MatrixFunction> coefficients;  // size 2n + 1, index = k
  std::vector<int> alpha, beta;              // strictly increasing, length n
  std::vector<std::vector<Eigen::MatrixXd>> boundary_b;  // [j][k], j<n, k<2n
  std::vector<std::vector<Eigen::MatrixXd>> boundary_c;
  double theta = 0.5 * 3.14159265358979323846;  // determinant-power cut angle
  double T = 1.0;
  double ode_tol = 1e-10;
  // set by square_operator: enables the reduced scalar Cauchy path
  std::optional<CoefficientProfile> squared_damping;
};

// Checks sizes, boundary normalization b_{j alpha_j} = c_{j beta_j} = I,
// leading-coefficient invertibility and that spec(a_{2n}) avoids the theta
// ray, sampled on a grid. Throws std::invalid_argument on violation.
void validate(const BFKOperatorSpec& spec);

// g = (|alpha|/n - n + 1/2) / 2 as an exact rational.
Rational g_exponent(int abs_alpha, int n);

// det of the n x n matrix with entries w_k^{alpha_j},
// w_k = exp((2k - n - 1) pi i / (2n)).
std::complex<double> h_det(const std::vector<int>& alpha, int n);

// prod_j |gamma_j|^g exp(i g arg gamma_j) with arguments selected in
// (theta - 2 pi, theta). Throws on gamma = 0 or gamma on the cut ray.
std::complex<double> det_power_theta(
    const std::vector<std::complex<double>>& gammas, Rational g, double theta);

// K_theta = [(-1)^{|beta|} (2n)^n h_alpha^{-1} h_beta^{-1}]^r
//           (det a_{2n}(0))_theta^{g_beta} (det a_{2n}(T))_theta^{g_alpha}.
std::complex<double> k_theta(const BFKOperatorSpec& spec);

// Block matrices B, C of size (2n r) x (2n r) built from the boundary data.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> boundary_matrices(
    const BFKOperatorSpec& spec);

// The squared damped wave operator H^2 as a BFK operator: n = 1, r = 2,
// a_2 = [[-1, 0], [2a, -1]], a_1 = 0, a_0 = [[0, -2a], [0, 4a^2]], Dirichlet
// data, theta = -2 epsilon just below the positive real axis.
BFKOperatorSpec square_operator(const ProblemSpec& spec,
                                double epsilon = 1e-3);

// Y(T) assembled column-by-column from the Cauchy problems A y = 0,
// y^(k)(0) = delta_{k l} I, integrated with the ode module. Implemented for
// n = 1; the squared-operator structure (u1'' = 0) is used as a fast path.
Eigen::MatrixXcd cauchy_matrix_solution(const BFKOperatorSpec& spec);

// Generic n = 1 column integration, ignoring any fast-path tag.
Eigen::MatrixXcd cauchy_matrix_solution_generic(const BFKOperatorSpec& spec);

// Closed form y_1(x) = [[x, I(x)], [0, x]] with
// I(x) = int_0^x int_0^q 2 a(s) s ds dq by nested adaptive quadrature.
Eigen::Matrix2d y1_closed_form(const ProblemSpec& spec, double x);

// det(B Y(T) - C) via LU with partial pivoting.
std::complex<double> det_BYC(const BFKOperatorSpec& spec,
                             const Eigen::MatrixXcd& Y);

// Det A = K_theta exp((i/2) int Tr(a_{2n}^{-1} a_{2n-1})) det(B Y(T) - C).
DeterminantResult bfk_determinant(const BFKOperatorSpec& spec);

// Run report matching the serialized interface: K_theta, trace factor,
// det(BY(T) - C), determinant, theta and the damping-profile hash.
struct BFKRunReport {
  std::complex<double> k_theta;
  std::complex<double> trace_factor;
  std::complex<double> det_byc;
  std::complex<double> determinant;
  double theta = 0.0;
  std::string profile_hash;
};
BFKRunReport bfk_run_report(const BFKOperatorSpec& spec);

}  // namespace specdet
