#pragma once

#include <string>
#include <vector>

namespace specdet {

// One additive term A*sin(w*x + phi) of a trigonometric profile.
struct TrigTerm {
  double amplitude = 0;
  double frequency = 0;
  double phase = 0;
};

// A continuous coefficient function on [0, T]: the damping a(x) or the
// potential b(x). Immutable after construction; evaluation is pure.
class CoefficientProfile {
 public:
  enum class Kind { Constant, Polynomial, Trigonometric, Sampled };

  static CoefficientProfile constant(double value, double domain_length);
  static CoefficientProfile polynomial(std::vector<double> coefficients,
                                       double domain_length);
  static CoefficientProfile trigonometric(std::vector<TrigTerm> terms,
                                          double domain_length);
  // Linear interpolation through (abscissae, ordinates); abscissae must be
  // strictly increasing with abscissae.front() == 0; T = abscissae.back().
  static CoefficientProfile sampled(std::vector<double> abscissae,
                                    std::vector<double> ordinates);
  static CoefficientProfile zero(double domain_length) {
    return constant(0.0, domain_length);
  }

  Kind kind() const { return kind_; }
  double domain_length() const { return domain_length_; }
  double operator()(double x) const;

  double constant_value() const { return value_; }
  const std::vector<double>& coefficients() const { return coeffs_; }
  const std::vector<TrigTerm>& terms() const { return terms_; }
  const std::vector<double>& abscissae() const { return xs_; }
  const std::vector<double>& ordinates() const { return ys_; }

 private:
  CoefficientProfile() = default;

  Kind kind_ = Kind::Constant;
  double domain_length_ = 1.0;
  double value_ = 0.0;            // Constant
  std::vector<double> coeffs_;    // Polynomial, ascending powers
  std::vector<TrigTerm> terms_;   // Trigonometric
  std::vector<double> xs_, ys_;   // Sampled
};

// a(x); throws std::domain_error for x outside [0, T] (up to roundoff slack).
double evaluate(const CoefficientProfile& profile, double x);

// (1/T) * integral of a over [0, T]. Exact for constant, polynomial and
// sampled kinds; adaptive quadrature to 1e-10 otherwise.
double mean(const CoefficientProfile& profile);

// (1/T) * integral of a^2 over [0, T]; same exactness policy as mean().
double mean_square(const CoefficientProfile& profile);

// Cheap upper bound for max |a| on [0, T]; used for spectral search radii.
double max_abs_bound(const CoefficientProfile& profile);

}  // namespace specdet
