#include "specdet/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "specdet/quadrature.hpp"

namespace specdet {

namespace {
constexpr double kQuadTol = 1e-10;

void check_domain_length(double T) {
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw std::invalid_argument("profile: domain length must be positive");
  }
}
}  // namespace

CoefficientProfile CoefficientProfile::constant(double value,
                                                double domain_length) {
  check_domain_length(domain_length);
  CoefficientProfile p;
  p.kind_ = Kind::Constant;
  p.domain_length_ = domain_length;
  p.value_ = value;
  return p;
}

CoefficientProfile CoefficientProfile::polynomial(
    std::vector<double> coefficients, double domain_length) {
  check_domain_length(domain_length);
  if (coefficients.empty()) coefficients.push_back(0.0);
  CoefficientProfile p;
  p.kind_ = Kind::Polynomial;
  p.domain_length_ = domain_length;
  p.coeffs_ = std::move(coefficients);
  return p;
}

CoefficientProfile CoefficientProfile::trigonometric(
    std::vector<TrigTerm> terms, double domain_length) {
  check_domain_length(domain_length);
  CoefficientProfile p;
  p.kind_ = Kind::Trigonometric;
  p.domain_length_ = domain_length;
  p.terms_ = std::move(terms);
  return p;
}

CoefficientProfile CoefficientProfile::sampled(std::vector<double> abscissae,
                                               std::vector<double> ordinates) {
  if (abscissae.size() < 2 || abscissae.size() != ordinates.size()) {
    throw std::invalid_argument("sampled profile: need >= 2 matching nodes");
  }
  if (abscissae.front() != 0.0) {
    throw std::invalid_argument("sampled profile: first abscissa must be 0");
  }
  for (std::size_t i = 1; i < abscissae.size(); ++i) {
    if (!(abscissae[i] > abscissae[i - 1])) {
      throw std::invalid_argument(
          "sampled profile: abscissae must be strictly increasing");
    }
  }
  check_domain_length(abscissae.back());
  CoefficientProfile p;
  p.kind_ = Kind::Sampled;
  p.domain_length_ = abscissae.back();
  p.xs_ = std::move(abscissae);
  p.ys_ = std::move(ordinates);
  return p;
}

double CoefficientProfile::operator()(double x) const {
  return evaluate(*this, x);
}

double evaluate(const CoefficientProfile& profile, double x) {
  const double T = profile.domain_length();
  const double slack = 1e-9 * std::max(1.0, T);
  if (x < -slack || x > T + slack || !std::isfinite(x)) {
    throw std::domain_error("profile evaluation outside [0, T]");
  }
  x = std::clamp(x, 0.0, T);
  switch (profile.kind()) {
    case CoefficientProfile::Kind::Constant:
      return profile.constant_value();
    case CoefficientProfile::Kind::Polynomial: {
      const auto& c = profile.coefficients();
      double v = 0.0;
      for (std::size_t i = c.size(); i-- > 0;) v = v * x + c[i];
      return v;
    }
    case CoefficientProfile::Kind::Trigonometric: {
      double v = 0.0;
      for (const auto& t : profile.terms()) {
        v += t.amplitude * std::sin(t.frequency * x + t.phase);
      }
      return v;
    }
    case CoefficientProfile::Kind::Sampled: {
      const auto& xs = profile.abscissae();
      const auto& ys = profile.ordinates();
      auto it = std::upper_bound(xs.begin(), xs.end(), x);
      std::size_t i = (it == xs.begin()) ? 1 : it - xs.begin();
      if (i >= xs.size()) i = xs.size() - 1;
      const double x0 = xs[i - 1], x1 = xs[i];
      const double w = (x - x0) / (x1 - x0);
      return ys[i - 1] + w * (ys[i] - ys[i - 1]);
    }
  }
  throw std::logic_error("profile: unknown kind");
}

namespace {

// integral of x^k over [0, T]
double power_integral(int k, double T) {
  return std::pow(T, k + 1) / (k + 1);
}

double poly_integral(const std::vector<double>& c, double T) {
  double s = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    s += c[k] * power_integral(static_cast<int>(k), T);
  }
  return s;
}

std::vector<double> poly_square(const std::vector<double>& c) {
  std::vector<double> sq(2 * c.size() - 1, 0.0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = 0; j < c.size(); ++j) sq[i + j] += c[i] * c[j];
  }
  return sq;
}

double sampled_integral(const std::vector<double>& xs,
                        const std::vector<double>& ys) {
  double s = 0.0;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    s += 0.5 * (ys[i - 1] + ys[i]) * (xs[i] - xs[i - 1]);
  }
  return s;
}

double sampled_square_integral(const std::vector<double>& xs,
                               const std::vector<double>& ys) {
  // integral of the square of a linear segment:
  // (y0^2 + y0*y1 + y1^2)/3 * dx
  double s = 0.0;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double y0 = ys[i - 1], y1 = ys[i];
    s += (y0 * y0 + y0 * y1 + y1 * y1) / 3.0 * (xs[i] - xs[i - 1]);
  }
  return s;
}

}  // namespace

double mean(const CoefficientProfile& profile) {
  const double T = profile.domain_length();
  switch (profile.kind()) {
    case CoefficientProfile::Kind::Constant:
      return profile.constant_value();
    case CoefficientProfile::Kind::Polynomial:
      return poly_integral(profile.coefficients(), T) / T;
    case CoefficientProfile::Kind::Sampled:
      return sampled_integral(profile.abscissae(), profile.ordinates()) / T;
    case CoefficientProfile::Kind::Trigonometric:
      return integrate_adaptive([&](double x) { return evaluate(profile, x); },
                                0.0, T, kQuadTol) /
             T;
  }
  throw std::logic_error("profile: unknown kind");
}

double mean_square(const CoefficientProfile& profile) {
  const double T = profile.domain_length();
  switch (profile.kind()) {
    case CoefficientProfile::Kind::Constant: {
      const double v = profile.constant_value();
      return v * v;
    }
    case CoefficientProfile::Kind::Polynomial:
      return poly_integral(poly_square(profile.coefficients()), T) / T;
    case CoefficientProfile::Kind::Sampled:
      return sampled_square_integral(profile.abscissae(),
                                     profile.ordinates()) /
             T;
    case CoefficientProfile::Kind::Trigonometric:
      return integrate_adaptive(
                 [&](double x) {
                   const double v = evaluate(profile, x);
                   return v * v;
                 },
                 0.0, T, kQuadTol) /
             T;
  }
  throw std::logic_error("profile: unknown kind");
}

double max_abs_bound(const CoefficientProfile& profile) {
  switch (profile.kind()) {
    case CoefficientProfile::Kind::Constant:
      return std::abs(profile.constant_value());
    case CoefficientProfile::Kind::Polynomial: {
      // sum of |c_k| T^k bounds |p| on [0, T]
      double s = 0.0, xk = 1.0;
      for (double c : profile.coefficients()) {
        s += std::abs(c) * xk;
        xk *= profile.domain_length();
      }
      return s;
    }
    case CoefficientProfile::Kind::Trigonometric: {
      double s = 0.0;
      for (const auto& t : profile.terms()) s += std::abs(t.amplitude);
      return s;
    }
    case CoefficientProfile::Kind::Sampled: {
      double m = 0.0;
      for (double y : profile.ordinates()) m = std::max(m, std::abs(y));
      return m;
    }
  }
  throw std::logic_error("profile: unknown kind");
}

}  // namespace specdet
