#include "specdet/zeta.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "specdet/ode.hpp"

namespace specdet {

namespace {
constexpr double kPi = 3.14159265358979323846;
using Cplx = std::complex<double>;

// sqrt with the argument of z selected in (theta - 2 pi, theta)
Cplx sqrt_on_branch(Cplx z, double theta) {
  const double r = std::abs(z);
  if (r == 0.0) throw std::invalid_argument("sqrt_on_branch: zero argument");
  double arg = std::arg(z);
  while (arg >= theta) arg -= 2.0 * kPi;
  while (arg < theta - 2.0 * kPi) arg += 2.0 * kPi;
  return std::sqrt(r) * std::exp(Cplx(0.0, 0.5 * arg));
}
}  // namespace

std::pair<double, double> riemann_zeta_constants() {
  return {-0.5, -0.5 * std::log(2.0 * kPi)};
}

DeterminantResult det_H0_closed_form(double T, BranchCut cut) {
  if (!(T > 0.0)) throw std::invalid_argument("det_H0_closed_form: T > 0");
  const auto [z0, zp0] = riemann_zeta_constants();
  // -zeta'(0) = -2 log(T/pi) zeta_R(0) - 2 zeta_R'(0)  [+ 2 i pi zeta_R(0)
  // for the cut below the positive axis]
  Cplx minus_zeta_prime = -2.0 * std::log(T / kPi) * z0 - 2.0 * zp0;
  if (cut.convention == CutConvention::BelowPositiveAxis) {
    minus_zeta_prime += Cplx(0.0, 2.0 * kPi * z0);
  }
  DeterminantResult res;
  res.value = std::exp(minus_zeta_prime);
  res.method = DeterminantMethod::ClosedFormZeta;
  res.cut = cut;
  res.diagnostics["minus_zeta_prime_re"] = minus_zeta_prime.real();
  res.diagnostics["minus_zeta_prime_im"] = minus_zeta_prime.imag();
  return res;
}

std::complex<double> zeta_A0_prime0(double T) {
  if (!(T > 0.0)) throw std::invalid_argument("zeta_A0_prime0: T > 0");
  const auto [z0, zp0] = riemann_zeta_constants();
  return Cplx(0.0, 2.0 * kPi) * z0 - 4.0 * std::log(T / kPi) * z0 - 4.0 * zp0;
}

DeterminantResult lift_determinant(std::complex<double> det_A, int card_I2,
                                   BranchCut cut) {
  if (det_A == Cplx(0.0, 0.0)) {
    throw std::invalid_argument("lift_determinant: Det A must be nonzero");
  }
  if (card_I2 < 0) {
    throw std::invalid_argument("lift_determinant: card I2 must be >= 0");
  }
  if (card_I2 % 2 != 0) {
    throw std::logic_error(
        "lift_determinant: odd card I2 contradicts the pairing of negative "
        "real eigenvalues");
  }
  const double theta_a = -2.0 * cut.epsilon;
  const Cplx root = sqrt_on_branch(det_A, theta_a);
  const Cplx half_turn =
      cut.convention == CutConvention::AboveNegativeAxis ? Cplx(0.0, 1.0)
                                                         : Cplx(0.0, -1.0);
  const double parity = (card_I2 % 2 == 0) ? 1.0 : -1.0;  // exp(-i pi card I2)
  DeterminantResult res;
  res.value = root * half_turn * parity;
  res.method = DeterminantMethod::BfkLift;
  res.cut = cut;
  res.diagnostics["card_I2"] = card_I2;
  res.diagnostics["sqrt_det_A_re"] = root.real();
  res.diagnostics["sqrt_det_A_im"] = root.imag();
  return res;
}

DeterminantResult relative_determinant(const Spectrum& spectrum,
                                       const ProblemSpec& spec, int pairs) {
  if (pairs < 1) {
    throw std::invalid_argument("relative_determinant: need pairs >= 1");
  }
  const double T = spec.T;

  std::vector<double> pair_products;
  for (const auto& rec : spectrum.records) {
    if (rec.cls == EigenvalueClass::Upper) {
      for (int m = 0; m < rec.multiplicity; ++m) {
        pair_products.push_back(std::norm(rec.value));
      }
    }
  }
  std::vector<double> reals;
  for (const auto& rec : spectrum.records) {
    if (rec.cls == EigenvalueClass::RealPositive ||
        rec.cls == EigenvalueClass::RealNegative) {
      for (int m = 0; m < rec.multiplicity; ++m) {
        reals.push_back(rec.value.real());
      }
    }
  }
  if (reals.size() % 2 != 0) {
    throw std::out_of_range(
        "relative_determinant: odd number of real eigenvalues cannot be "
        "paired");
  }
  std::sort(reals.begin(), reals.end());
  for (std::size_t k = 0; k < reals.size() / 2; ++k) {
    pair_products.push_back(reals[k] * reals[reals.size() - 1 - k]);
  }
  std::sort(pair_products.begin(), pair_products.end(),
            [](double a, double b) { return std::abs(a) < std::abs(b); });

  if (pair_products.size() < static_cast<std::size_t>(pairs)) {
    throw std::out_of_range(
        "relative_determinant: spectrum holds fewer pairs than requested");
  }

  double product = 1.0;
  for (int j = 1; j <= pairs; ++j) {
    const double ref = (j * kPi / T) * (j * kPi / T);
    product *= pair_products[j - 1] / ref;
  }

  const double ma = mean(spec.damping);
  const double ms = mean_square(spec.damping);
  DeterminantResult res;
  res.value = 2.0 * T * product;
  res.method = DeterminantMethod::RelativeProduct;
  res.cut = BranchCut{CutConvention::AboveNegativeAxis, 1e-3};
  res.diagnostics["pairs_used"] = pairs;
  res.diagnostics["product_deviation"] = std::abs(product - 1.0);
  res.diagnostics["tail_estimate"] =
      std::abs(ms - ma * ma) * T * T / (kPi * kPi * pairs);
  return res;
}

namespace {

// shooting solution of y'' + b y = lambda y at x = T, y(0)=0, y'(0)=1
double potential_shot(const ProblemSpec& spec, double lambda_shift) {
  LinearSystem<double> sys;
  sys.dimension = 2;
  sys.x0 = 0.0;
  sys.x1 = spec.T;
  const CoefficientProfile b = *spec.potential;
  sys.rhs = [b, lambda_shift](double x, const Eigen::VectorXd& y,
                              Eigen::VectorXd& dy) {
    dy[0] = y[1];
    dy[1] = (lambda_shift - evaluate(b, x)) * y[0];
  };
  Eigen::VectorXd y0(2);
  y0 << 0.0, 1.0;
  return integrate(sys, std::move(y0), spec.tol.ode_tol)[0];
}

}  // namespace

std::pair<bool, int> rhs_negative_definiteness(const ProblemSpec& spec) {
  if (!spec.potential) {
    throw std::invalid_argument("rhs_negative_definiteness: no potential");
  }
  // Rayleigh bound: positive Dirichlet eigenvalues of d^2/dx^2 + b lie below
  // max b; scan the shooting function for sign changes on (0, max b + 1].
  const double bmax = max_abs_bound(*spec.potential);
  const double max_eig = bmax + 1.0;
  if (max_eig <= 1.0 && bmax == 0.0) return {true, 0};

  const double step = std::min(1.0, kPi * kPi / (spec.T * spec.T)) / 4.0;
  const int n = std::max(128, static_cast<int>(std::ceil(max_eig / step)));
  int sign_changes = 0;
  double prev = potential_shot(spec, 0.0);
  for (int i = 1; i <= n; ++i) {
    const double lam = max_eig * i / n;
    const double cur = potential_shot(spec, lam);
    if (prev == 0.0 || (prev < 0.0) != (cur < 0.0)) ++sign_changes;
    prev = cur;
  }
  return {sign_changes == 0, sign_changes};
}

DeterminantResult potential_determinant(const ProblemSpec& spec,
                                        BranchCut cut) {
  if (!spec.potential) {
    throw std::invalid_argument("potential_determinant: no potential");
  }
  const double yT = potential_shot(spec, 0.0);
  const double threshold = 1e-10 * std::max(1.0, spec.T);
  if (std::abs(yT) < threshold) {
    throw std::runtime_error(
        "potential_determinant: zero mode of d^2/dx^2 + b, determinant "
        "ill-defined");
  }
  const auto [all_negative, positive_count] = rhs_negative_definiteness(spec);

  double phase = 1.0;
  int card_I2 = 0;
  if (!all_negative) {
    const Spectrum sp = find_spectrum(spec, 2.0 * kPi / spec.T);
    card_I2 = sp.card_I2;
    phase = (card_I2 % 2 == 0) ? 1.0 : -1.0;
  }
  const double sign =
      cut.convention == CutConvention::AboveNegativeAxis ? 1.0 : -1.0;

  DeterminantResult res;
  res.value = sign * 2.0 * yT * phase;
  res.method = DeterminantMethod::PotentialCauchy;
  res.cut = cut;
  res.diagnostics["y_T"] = yT;
  res.diagnostics["rhs_positive_count"] = positive_count;
  res.diagnostics["card_I2"] = card_I2;
  return res;
}

double choose_epsilon(const Spectrum& spectrum, CutConvention convention) {
  constexpr double kDefault = 1e-3;
  double min_gap = kPi / 2.0;
  for (const auto& rec : spectrum.records) {
    double phase = std::arg(rec.value);
    if (phase < 0.0) phase += 2.0 * kPi;
    double gap;
    if (convention == CutConvention::AboveNegativeAxis) {
      // exclusion interval [pi - eps, pi): only phases below pi matter
      if (!(phase < kPi)) continue;
      gap = kPi - phase;
    } else {
      // exclusion interval [2 pi - eps, 2 pi)
      if (!(phase < 2.0 * kPi) || phase == 0.0) continue;
      gap = 2.0 * kPi - phase;
    }
    min_gap = std::min(min_gap, gap);
  }
  return std::max(1e-12, std::min(kDefault, 0.5 * min_gap));
}

std::string to_string(DeterminantMethod method) {
  switch (method) {
    case DeterminantMethod::ClosedFormZeta:
      return "closed_form_zeta";
    case DeterminantMethod::BfkLift:
      return "bfk_lift";
    case DeterminantMethod::RelativeProduct:
      return "relative_product";
    case DeterminantMethod::PotentialCauchy:
      return "potential_cauchy";
    case DeterminantMethod::BfkSquare:
      return "bfk_square";
  }
  return "unknown";
}

std::string to_string(CutConvention convention) {
  return convention == CutConvention::AboveNegativeAxis
             ? "above_negative_axis"
             : "below_positive_axis";
}

}  // namespace specdet
