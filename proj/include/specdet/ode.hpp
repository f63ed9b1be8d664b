#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace specdet {

// First-order system y' = rhs(x, y) on [x0, x1] with rhs linear in y.
// Scalar is double or std::complex<double>.
template <class Scalar>
struct LinearSystem {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Eigen::Index dimension = 0;
  std::function<void(double x, const Vector& y, Vector& dy)> rhs;
  double x0 = 0.0;
  double x1 = 1.0;
};

// Integration could not continue (step size underflow after overflow or
// loss of smoothness); reached() is the abscissa where it stopped.
class IntegrationFailure : public std::runtime_error {
 public:
  IntegrationFailure(const std::string& what, double reached_abscissa)
      : std::runtime_error(what), reached_(reached_abscissa) {}
  double reached() const { return reached_; }

 private:
  double reached_;
};

// Representative vector plus log-scale: true solution = value * exp(log_scale).
template <class Scalar>
struct ScaledState {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> value;
  double log_scale = 0.0;
};

namespace ode_detail {

// Dormand-Prince 5(4) embedded pair, FSAL, local extrapolation, PI step
// control. Deterministic for identical inputs. When rescale_threshold is
// finite, the state is renormalized whenever its sup-norm exceeds it
// (valid because the flow is linear).
template <class Scalar>
ScaledState<Scalar> dopri5(const LinearSystem<Scalar>& system,
                           Eigen::Matrix<Scalar, Eigen::Dynamic, 1> y,
                           double tol, double rescale_threshold) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                      a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                      a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                      a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                      b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                      e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  if (!(tol > 0.0)) throw std::invalid_argument("integrate: tol must be > 0");
  if (y.size() != system.dimension) {
    throw std::invalid_argument("integrate: initial state has wrong dimension");
  }
  const double span = system.x1 - system.x0;
  if (!(span > 0.0)) {
    throw std::invalid_argument("integrate: domain must satisfy x0 < x1");
  }

  const Eigen::Index n = y.size();
  Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n),
      err(n);
  double x = system.x0;
  double h = span / 100.0;
  const double h_floor = 1e-13 * span;
  double log_scale = 0.0;
  double errold = 1e-4;
  long steps = 0;
  const long max_steps = 200'000'000;

  system.rhs(x, y, k1);
  while (x < system.x1) {
    if (++steps > max_steps) {
      throw IntegrationFailure("integrate: step budget exhausted", x);
    }
    if (x + h > system.x1) h = system.x1 - x;
    ytmp = y + h * a21 * k1;
    system.rhs(x + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    system.rhs(x + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    system.rhs(x + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    system.rhs(x + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    system.rhs(x + h, ytmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    system.rhs(x + h, ynew, k7);
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double sk = 0.0;
    bool finite = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ei = std::abs(err[i]);
      const double yi = std::max(std::abs(y[i]), std::abs(ynew[i]));
      if (!std::isfinite(ei) || !std::isfinite(yi)) {
        finite = false;
        break;
      }
      sk = std::max(sk, ei / (tol * (1.0 + yi)));
    }

    if (finite && sk <= 1.0) {
      x += h;
      y.swap(ynew);
      k1.swap(k7);
      double fac = 0.9 * std::pow(sk + 1e-30, -0.7 / 5.0) *
                   std::pow(errold + 1e-30, 0.4 / 5.0);
      errold = std::max(sk, 1e-4);
      h *= std::min(5.0, std::max(0.2, fac));
      if (std::isfinite(rescale_threshold)) {
        const double m = y.template lpNorm<Eigen::Infinity>();
        if (m > rescale_threshold) {
          y /= m;
          k1 /= m;
          log_scale += std::log(m);
        }
      }
    } else {
      h *= finite ? std::max(0.2, 0.9 * std::pow(sk, -1.0 / 5.0)) : 0.1;
      if (h < h_floor) {
        throw IntegrationFailure("integrate: step size underflow", x);
      }
    }
  }
  return {std::move(y), log_scale};
}

}  // namespace ode_detail

// y(x1) with local error control targeting ~tol*(1+|y|) accuracy.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> integrate(
    const LinearSystem<Scalar>& system,
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> initial, double tol = 1e-10) {
  return ode_detail::dopri5(system, std::move(initial), tol,
                            std::numeric_limits<double>::infinity())
      .value;
}

// As integrate(), but renormalizes the state whenever its sup-norm exceeds
// 1e100, returning the representative vector and the accumulated log-scale.
template <class Scalar>
ScaledState<Scalar> integrate_with_rescaling(
    const LinearSystem<Scalar>& system,
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> initial, double tol = 1e-10) {
  return ode_detail::dopri5(system, std::move(initial), tol, 1e100);
}

}  // namespace specdet
