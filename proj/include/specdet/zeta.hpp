#pragma once

#include <complex>
#include <map>
#include <string>
#include <utility>

#include "specdet/eigensolver.hpp"

namespace specdet {

enum class CutConvention {
  AboveNegativeAxis,  // log cut at angle pi - epsilon
  BelowPositiveAxis,  // log cut at angle 2 pi - epsilon
};

struct BranchCut {
  CutConvention convention = CutConvention::AboveNegativeAxis;
  double epsilon = 1e-3;
};

enum class DeterminantMethod {
  ClosedFormZeta,
  BfkLift,
  RelativeProduct,
  PotentialCauchy,
  BfkSquare,  // raw determinant of the squared operator
};

struct DeterminantResult {
  std::complex<double> value;
  DeterminantMethod method = DeterminantMethod::ClosedFormZeta;
  BranchCut cut;
  std::map<std::string, double> diagnostics;
};

// (zeta_R(0), zeta_R'(0)) = (-1/2, -log(2 pi)/2).
std::pair<double, double> riemann_zeta_constants();

// Undamped determinant via the closed-form zeta derivation:
// 2T above the negative axis, -2T below the positive axis.
DeterminantResult det_H0_closed_form(double T, BranchCut cut);

// -zeta'_{A0}(0) = -i pi + 2 log(2T) for the squared undamped operator.
std::complex<double> zeta_A0_prime0(double T);

// Det H = sqrt(Det A) * exp(+- i pi/2) * (-1)^{card I2}, with the square
// root taken on the branch with arguments in (theta - 2 pi, theta) for the
// squared-operator cut theta = -2 epsilon. Throws on odd card_I2.
DeterminantResult lift_determinant(std::complex<double> det_A, int card_I2,
                                   BranchCut cut);

// Spectral cross-check: 2T times the truncated product over the first N
// eigenvalue pairs of (pair product) / (j pi / T)^2. Conjugate pairs
// contribute |mu_j|^2; real eigenvalues are paired outermost-innermost.
DeterminantResult relative_determinant(const Spectrum& spectrum,
                                       const ProblemSpec& spec, int pairs);

// Determinant with a potential term: +-2 y(T) for y'' + b y = 0, y(0) = 0,
// y'(0) = 1, times (-1)^{card I2} when d^2/dx^2 + b has positive Dirichlet
// eigenvalues. Throws a zero-mode error when |y(T)| is below threshold.
DeterminantResult potential_determinant(
    const ProblemSpec& spec,
    BranchCut cut = {CutConvention::AboveNegativeAxis, 1e-3});

// Counts positive Dirichlet eigenvalues of d^2/dx^2 + b by scanning the
// real-axis shooting function for sign changes. Returns (all negative,
// positive count).
std::pair<bool, int> rhs_negative_definiteness(const ProblemSpec& spec);

// Half the minimal angular gap between computed eigenvalue phases and the
// nominal cut ray, capped at the default 1e-3; realizes the hypothesis that
// no eigenvalue phase falls in [pi - eps, pi) resp. [2 pi - eps, 2 pi).
double choose_epsilon(const Spectrum& spectrum, CutConvention convention);

std::string to_string(DeterminantMethod method);
std::string to_string(CutConvention convention);

}  // namespace specdet
