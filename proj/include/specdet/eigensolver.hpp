#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "specdet/profiles.hpp"

namespace specdet {

using Complex = std::complex<double>;

struct Tolerances {
  double ode_tol = 1e-10;
  double root_tol = 1e-10;
};

// Damped wave problem u_tt + 2 a(x) u_t = u_xx (+ b(x) u) on [0, T] with
// Dirichlet boundary conditions.
struct ProblemSpec {
  double T = 1.0;
  CoefficientProfile damping = CoefficientProfile::zero(1.0);
  std::optional<CoefficientProfile> potential;
  Tolerances tol;
};

struct ScaledComplex {
  Complex value;
  double log_scale = 0.0;
  Complex unscaled() const { return value * std::exp(log_scale); }
};

// F(lambda) = u0(T) for the shooting solution of
//   u0'' = (lambda^2 + 2 a(x) lambda - b(x)) u0,  u0(0) = 0, u0'(0) = 1.
// F is entire; its zeros (with multiplicity) are the eigenvalues.
ScaledComplex characteristic(const ProblemSpec& spec, Complex lambda);

// dF/dlambda via the variational system integrated alongside (u0, u0').
Complex characteristic_derivative(const ProblemSpec& spec, Complex lambda);

// F, F', F'' sharing one log-scale, plus the shooting-state magnitude used
// to normalize residuals. order selects how many derivatives to carry.
struct CharacteristicJet {
  Complex f, df, d2f;
  double log_scale = 0.0;
  double state_norm = 0.0;  // ||(u0, u0')(T)|| at the shared scale
};
CharacteristicJet characteristic_jet(const ProblemSpec& spec, Complex lambda,
                                     int order, double ode_tol);

// Scale-free closeness-to-eigenvalue measure: |u0(T)| / ||(u0, u0')(T)||.
double characteristic_residual(const ProblemSpec& spec, Complex lambda);

enum class EigenvalueClass { Upper, Lower, RealPositive, RealNegative };

struct EigenvalueRecord {
  Complex value;
  int multiplicity = 1;
  EigenvalueClass cls = EigenvalueClass::Upper;
  double residual = 0.0;
};

struct Spectrum {
  std::vector<EigenvalueRecord> records;  // sorted by (Im, Re)
  double strip_height = 0.0;
  int card_I1 = 0;  // positive real eigenvalues
  int card_I2 = 0;  // negative real eigenvalues
};

struct Rect {
  double re_lo, re_hi, im_lo, im_hi;
};

class IsolationError : public std::runtime_error {
 public:
  IsolationError(const std::string& what, Rect box)
      : std::runtime_error(what), box_(box) {}
  Rect box() const { return box_; }

 private:
  Rect box_;
};

class RefinementError : public std::runtime_error {
 public:
  RefinementError(const std::string& what, Rect box)
      : std::runtime_error(what), box_(box) {}
  Rect box() const { return box_; }

 private:
  Rect box_;
};

// Number of zeros of F inside the rectangle, with multiplicity, by the
// argument principle. The contour is nudged outward (10*root_tol per
// attempt, up to 8 attempts) if a zero is detected on it.
int count_in_rectangle(const ProblemSpec& spec, Rect rect);

// All eigenvalues with |Im| <= strip_height and |Re| <= search_radius(spec),
// refined to |dlambda| <= root_tol and classified. Lower-half records are
// deduced from upper-half roots and verified by one residual evaluation.
Spectrum find_spectrum(const ProblemSpec& spec, double strip_height);

// First j_max upper-half model eigenvalues
//   mu_j = i j pi / T - <a> - i <a^2> T / (2 pi j).
std::vector<Complex> model_spectrum(const ProblemSpec& spec, int j_max);

struct AsymptoticResidualRow {
  int j = 0;
  double re_residual = 0.0;  // |Re mu_j + <a>|
  double im_residual = 0.0;  // |Im mu_j - j pi/T + <a^2> T/(2 pi j)|
  bool ambiguous = false;    // index matching was not unique
};

// Upper-half eigenvalues matched to indices j by nearest model Im value
// (ties broken by smaller |Re| difference).
std::vector<AsymptoticResidualRow> asymptotic_residuals(
    const Spectrum& spectrum, const ProblemSpec& spec);

// Heuristic real-part search bound R = 2 max|a| + 1/T + 1 (plus sqrt(max|b|)
// when a potential is present); validated inside find_spectrum by zero
// counts over the outer annulus.
double search_radius(const ProblemSpec& spec);

}  // namespace specdet
