#include "specdet/bfk.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "specdet/io.hpp"
#include "specdet/ode.hpp"
#include "specdet/quadrature.hpp"

namespace specdet {

namespace {
constexpr double kPi = 3.14159265358979323846;
using Cplx = std::complex<double>;

double wrap_to_pi(double a) {
  while (a > kPi) a -= 2.0 * kPi;
  while (a <= -kPi) a += 2.0 * kPi;
  return a;
}

std::vector<Cplx> matrix_eigenvalues(const Eigen::MatrixXd& m) {
  if (m.rows() == 1) return {Cplx(m(0, 0), 0.0)};
  if (m.rows() == 2) {
    // quadratic formula; exact for the triangular leading blocks that occur
    // in the squared wave operator
    const double tr = m(0, 0) + m(1, 1);
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const Cplx disc = std::sqrt(Cplx(tr * tr - 4.0 * det, 0.0));
    return {0.5 * (tr + disc), 0.5 * (tr - disc)};
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  std::vector<Cplx> out(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[i] = es.eigenvalues()[i];
  return out;
}

}  // namespace

bool operator==(const Rational& a, const Rational& b) {
  return a.num == b.num && a.den == b.den;
}

Rational g_exponent(int abs_alpha, int n) {
  if (n < 1 || abs_alpha < 0) {
    throw std::invalid_argument("g_exponent: need n >= 1, |alpha| >= 0");
  }
  // (|alpha|/n - n + 1/2) / 2 = (2|alpha| - 2n^2 + n) / (4n)
  long long num = 2LL * abs_alpha - 2LL * n * n + n;
  long long den = 4LL * n;
  const long long g = std::gcd(std::abs(num), den);
  return Rational{num / g, den / g};
}

std::complex<double> h_det(const std::vector<int>& alpha, int n) {
  if (static_cast<int>(alpha.size()) != n) {
    throw std::invalid_argument("h_det: alpha must have length n");
  }
  Eigen::MatrixXcd m(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = 1; k <= n; ++k) {
      const Cplx w = std::exp(Cplx(0.0, (2.0 * k - n - 1.0) / (2.0 * n) * kPi));
      m(j, k - 1) = std::pow(w, alpha[j]);
    }
  }
  return m.determinant();
}

std::complex<double> det_power_theta(
    const std::vector<std::complex<double>>& gammas, Rational g,
    double theta) {
  const double gv = g.value();
  Cplx out(1.0, 0.0);
  for (const Cplx& gamma : gammas) {
    const double r = std::abs(gamma);
    if (r == 0.0) {
      throw std::invalid_argument("det_power_theta: zero eigenvalue");
    }
    if (std::abs(wrap_to_pi(std::arg(gamma) - theta)) < 1e-9) {
      throw std::invalid_argument(
          "det_power_theta: eigenvalue on the cut ray");
    }
    double arg = std::arg(gamma);
    while (arg >= theta) arg -= 2.0 * kPi;
    while (arg < theta - 2.0 * kPi) arg += 2.0 * kPi;
    out *= std::pow(r, gv) * std::exp(Cplx(0.0, gv * arg));
  }
  return out;
}

void validate(const BFKOperatorSpec& spec) {
  const int n = spec.n, r = spec.r;
  if (n < 1 || r < 1) throw std::invalid_argument("bfk: need n, r >= 1");
  if (!(spec.T > 0.0)) throw std::invalid_argument("bfk: need T > 0");
  if (static_cast<int>(spec.coefficients.size()) != 2 * n + 1) {
    throw std::invalid_argument("bfk: need 2n + 1 coefficient functions");
  }
  if (!spec.coefficients[2 * n]) {
    throw std::invalid_argument("bfk: leading coefficient must be present");
  }
  auto check_orders = [n](const std::vector<int>& v, const char* name) {
    if (static_cast<int>(v.size()) != n) {
      throw std::invalid_argument(std::string("bfk: ") + name +
                                  " must have length n");
    }
    for (int j = 0; j < n; ++j) {
      if (v[j] < 0 || v[j] > 2 * n - 1 || (j > 0 && v[j] <= v[j - 1])) {
        throw std::invalid_argument(std::string("bfk: ") + name +
                                    " must be strictly increasing in "
                                    "[0, 2n-1]");
      }
    }
  };
  check_orders(spec.alpha, "alpha");
  check_orders(spec.beta, "beta");

  auto check_boundary = [&](const std::vector<std::vector<Eigen::MatrixXd>>& m,
                            const std::vector<int>& orders,
                            const char* name) {
    if (static_cast<int>(m.size()) != n) {
      throw std::invalid_argument(std::string("bfk: ") + name +
                                  " must have n rows");
    }
    for (int j = 0; j < n; ++j) {
      if (static_cast<int>(m[j].size()) <= orders[j]) {
        throw std::invalid_argument(std::string("bfk: ") + name +
                                    " row too short");
      }
      if (!m[j][orders[j]].isIdentity(1e-14)) {
        throw std::invalid_argument(std::string("bfk: ") + name +
                                    " leading boundary block must be I");
      }
    }
  };
  check_boundary(spec.boundary_b, spec.alpha, "boundary_b");
  check_boundary(spec.boundary_c, spec.beta, "boundary_c");

  // leading coefficient invertible with spectrum off the theta ray,
  // sampled at quadrature nodes
  const int samples = 33;
  for (int i = 0; i < samples; ++i) {
    const double x = spec.T * i / (samples - 1);
    const Eigen::MatrixXd a2n = spec.coefficients[2 * n](x);
    if (a2n.rows() != r || a2n.cols() != r) {
      throw std::invalid_argument("bfk: leading coefficient has wrong size");
    }
    const double det = a2n.determinant();
    const double scale = std::pow(std::max(a2n.norm(), 1e-300), r);
    if (std::abs(det) < 1e-12 * scale) {
      throw std::invalid_argument("bfk: leading coefficient is singular");
    }
    for (const Cplx& gamma : matrix_eigenvalues(a2n)) {
      if (std::abs(wrap_to_pi(std::arg(gamma) - spec.theta)) < 1e-9) {
        throw std::invalid_argument(
            "bfk: spectrum of the leading coefficient meets the theta ray");
      }
    }
  }
}

std::complex<double> k_theta(const BFKOperatorSpec& spec) {
  const int n = spec.n, r = spec.r;
  const int abs_alpha = std::accumulate(spec.alpha.begin(), spec.alpha.end(), 0);
  const int abs_beta = std::accumulate(spec.beta.begin(), spec.beta.end(), 0);
  const Cplx ha = h_det(spec.alpha, n);
  const Cplx hb = h_det(spec.beta, n);
  const double sign = (abs_beta % 2 == 0) ? 1.0 : -1.0;
  const Cplx base = sign * std::pow(2.0 * n, n) / (ha * hb);
  Cplx prefactor(1.0, 0.0);
  for (int i = 0; i < r; ++i) prefactor *= base;

  const Eigen::MatrixXd a2n0 = spec.coefficients[2 * n](0.0);
  const Eigen::MatrixXd a2nT = spec.coefficients[2 * n](spec.T);
  return prefactor *
         det_power_theta(matrix_eigenvalues(a2n0), g_exponent(abs_beta, n),
                         spec.theta) *
         det_power_theta(matrix_eigenvalues(a2nT), g_exponent(abs_alpha, n),
                         spec.theta);
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> boundary_matrices(
    const BFKOperatorSpec& spec) {
  const int n = spec.n, r = spec.r;
  const int dim = 2 * n * r;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(dim, dim);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k <= spec.alpha[j]; ++k) {
      B.block(j * r, k * r, r, r) = spec.boundary_b[j][k];
    }
    for (int k = 0; k <= spec.beta[j]; ++k) {
      C.block((n + j) * r, k * r, r, r) = spec.boundary_c[j][k];
    }
  }
  return {B, C};
}

BFKOperatorSpec square_operator(const ProblemSpec& spec, double epsilon) {
  if (spec.potential) {
    throw std::invalid_argument(
        "square_operator: the potential variant is handled by "
        "potential_determinant");
  }
  const CoefficientProfile a = spec.damping;
  BFKOperatorSpec out;
  out.n = 1;
  out.r = 2;
  out.T = spec.T;
  out.theta = -2.0 * epsilon;
  out.ode_tol = spec.tol.ode_tol;
  out.coefficients.resize(3);
  out.coefficients[0] = [a](double x) {
    const double ax = evaluate(a, x);
    Eigen::MatrixXd m(2, 2);
    m << 0.0, -2.0 * ax, 0.0, 4.0 * ax * ax;
    return m;
  };
  out.coefficients[1] = nullptr;  // identically zero, kept exact
  out.coefficients[2] = [a](double x) {
    const double ax = evaluate(a, x);
    Eigen::MatrixXd m(2, 2);
    m << -1.0, 0.0, 2.0 * ax, -1.0;
    return m;
  };
  out.alpha = {0};
  out.beta = {0};
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2, 2);
  out.boundary_b = {{id, zero}};
  out.boundary_c = {{id, zero}};
  out.squared_damping = a;
  return out;
}

namespace {

// Reduced Cauchy solve for A = H^2: u1'' = 0 decouples, leaving the scalar
// problem u0'' = 2 a(x) u1(x). State (u0, u0', u1, u1').
Eigen::MatrixXcd cauchy_squared_fast(const BFKOperatorSpec& spec) {
  const CoefficientProfile a = *spec.squared_damping;
  LinearSystem<double> sys;
  sys.dimension = 4;
  sys.x0 = 0.0;
  sys.x1 = spec.T;
  sys.rhs = [a](double x, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    const double ax = evaluate(a, x);
    dy[0] = y[1];
    dy[1] = 2.0 * ax * y[2];
    dy[2] = y[3];
    dy[3] = 0.0;
  };

  Eigen::MatrixXcd Y(4, 4);
  for (int l = 0; l < 2; ++l) {
    for (int c = 0; c < 2; ++c) {
      Eigen::VectorXd y0 = Eigen::VectorXd::Zero(4);
      if (l == 0) {
        y0[c == 0 ? 0 : 2] = 1.0;  // y_0 block: values e_c, derivatives 0
      } else {
        y0[c == 0 ? 1 : 3] = 1.0;  // y_1 block: values 0, derivatives e_c
      }
      const Eigen::VectorXd yT = integrate(sys, std::move(y0), spec.ode_tol);
      Y(0, l * 2 + c) = yT[0];  // u0(T)
      Y(1, l * 2 + c) = yT[2];  // u1(T)
      Y(2, l * 2 + c) = yT[1];  // u0'(T)
      Y(3, l * 2 + c) = yT[3];  // u1'(T)
    }
  }
  return Y;
}

}  // namespace

Eigen::MatrixXcd cauchy_matrix_solution_generic(const BFKOperatorSpec& spec) {
  if (spec.n != 1) {
    throw std::logic_error(
        "cauchy_matrix_solution: implemented for n = 1 (second-order "
        "systems)");
  }
  const int r = spec.r;
  const MatrixFunction a2 = spec.coefficients[2];
  const MatrixFunction a1 = spec.coefficients[1];
  const MatrixFunction a0 = spec.coefficients[0];

  LinearSystem<Cplx> sys;
  sys.dimension = 2 * r;
  sys.x0 = 0.0;
  sys.x1 = spec.T;
  // A y = -a2 y'' - i a1 y' + a0 y = 0  =>  y'' = a2^{-1} (a0 y - i a1 y')
  sys.rhs = [a2, a1, a0, r](double x, const Eigen::VectorXcd& y,
                            Eigen::VectorXcd& dy) {
    const Eigen::VectorXcd head = y.head(r);
    const Eigen::VectorXcd tail = y.tail(r);
    Eigen::VectorXcd force = Eigen::VectorXcd::Zero(r);
    if (a0) force += a0(x).cast<Cplx>() * head;
    if (a1) force -= Cplx(0.0, 1.0) * (a1(x).cast<Cplx>() * tail);
    dy.head(r) = tail;
    dy.tail(r) = a2(x).cast<Cplx>().partialPivLu().solve(force);
  };

  Eigen::MatrixXcd Y(2 * r, 2 * r);
  for (int l = 0; l < 2; ++l) {
    for (int c = 0; c < r; ++c) {
      Eigen::VectorXcd y0 = Eigen::VectorXcd::Zero(2 * r);
      y0[l * r + c] = 1.0;
      const Eigen::VectorXcd yT = integrate(sys, std::move(y0), spec.ode_tol);
      Y.block(0, l * r + c, r, 1) = yT.head(r);
      Y.block(r, l * r + c, r, 1) = yT.tail(r);
    }
  }
  return Y;
}

Eigen::MatrixXcd cauchy_matrix_solution(const BFKOperatorSpec& spec) {
  if (spec.squared_damping) return cauchy_squared_fast(spec);
  return cauchy_matrix_solution_generic(spec);
}

Eigen::Matrix2d y1_closed_form(const ProblemSpec& spec, double x) {
  if (x < 0.0 || x > spec.T) {
    throw std::domain_error("y1_closed_form: x outside [0, T]");
  }
  const CoefficientProfile& a = spec.damping;
  const double outer_tol = 1e-10;
  auto inner = [&](double q) {
    return integrate_adaptive(
        [&](double s) { return 2.0 * evaluate(a, s) * s; }, 0.0, q,
        outer_tol / 10.0);
  };
  const double upper_right =
      x == 0.0 ? 0.0 : integrate_adaptive(inner, 0.0, x, outer_tol);
  Eigen::Matrix2d m;
  m << x, upper_right, 0.0, x;
  return m;
}

std::complex<double> det_BYC(const BFKOperatorSpec& spec,
                             const Eigen::MatrixXcd& Y) {
  const auto [B, C] = boundary_matrices(spec);
  if (B.rows() != Y.rows()) {
    throw std::invalid_argument("det_BYC: inconsistent sizes");
  }
  const Eigen::MatrixXcd M = B.cast<Cplx>() * Y - C.cast<Cplx>();
  const Cplx det = M.partialPivLu().determinant();

  // Dirichlet n = 1 sanity: det(BY - C) collapses to det y_1(T)
  const int r = spec.r;
  if (spec.n == 1 && spec.alpha == std::vector<int>{0} &&
      spec.beta == std::vector<int>{0}) {
    const Cplx direct = Y.block(0, r, r, r).determinant();
    if (std::abs(det - direct) > 1e-8 * (1.0 + std::abs(direct))) {
      throw std::logic_error(
          "det_BYC: block reduction disagrees with the full determinant");
    }
  }
  return det;
}

namespace {

struct BFKParts {
  Cplx k;
  Cplx trace_factor;
  Cplx det_byc;
  Cplx determinant;
};

BFKParts bfk_parts(const BFKOperatorSpec& spec) {
  validate(spec);
  BFKParts parts;
  parts.k = k_theta(spec);
  parts.trace_factor = Cplx(1.0, 0.0);
  const int n = spec.n;
  if (spec.coefficients[2 * n - 1]) {
    const double integral = integrate_adaptive(
        [&](double x) {
          const Eigen::MatrixXd a2n = spec.coefficients[2 * n](x);
          const Eigen::MatrixXd a2n1 = spec.coefficients[2 * n - 1](x);
          return a2n.partialPivLu().solve(a2n1).trace();
        },
        0.0, spec.T, 1e-10);
    parts.trace_factor = std::exp(Cplx(0.0, 0.5 * integral));
  }
  const Eigen::MatrixXcd Y = cauchy_matrix_solution(spec);
  parts.det_byc = det_BYC(spec, Y);

  const auto [B, C] = boundary_matrices(spec);
  const Eigen::MatrixXcd M = B.cast<Cplx>() * Y - C.cast<Cplx>();
  const double scale = std::pow(std::max(M.norm(), 1e-300), M.rows());
  if (std::abs(parts.det_byc) < 1e-12 * scale) {
    throw std::runtime_error(
        "bfk_determinant: B Y(T) - C is numerically singular (zero "
        "eigenvalue of the operator)");
  }
  parts.determinant = parts.k * parts.trace_factor * parts.det_byc;
  return parts;
}

}  // namespace

DeterminantResult bfk_determinant(const BFKOperatorSpec& spec) {
  const BFKParts parts = bfk_parts(spec);
  DeterminantResult res;
  res.value = parts.determinant;
  res.method = DeterminantMethod::BfkSquare;
  res.cut.convention = std::cos(spec.theta) > 0.0
                           ? CutConvention::BelowPositiveAxis
                           : CutConvention::AboveNegativeAxis;
  res.cut.epsilon = std::abs(wrap_to_pi(spec.theta)) / 2.0;
  res.diagnostics["k_theta_re"] = parts.k.real();
  res.diagnostics["k_theta_im"] = parts.k.imag();
  res.diagnostics["trace_factor_re"] = parts.trace_factor.real();
  res.diagnostics["trace_factor_im"] = parts.trace_factor.imag();
  res.diagnostics["det_byc_re"] = parts.det_byc.real();
  res.diagnostics["det_byc_im"] = parts.det_byc.imag();
  res.diagnostics["theta"] = spec.theta;
  return res;
}

BFKRunReport bfk_run_report(const BFKOperatorSpec& spec) {
  const BFKParts parts = bfk_parts(spec);
  BFKRunReport report;
  report.k_theta = parts.k;
  report.trace_factor = parts.trace_factor;
  report.det_byc = parts.det_byc;
  report.determinant = parts.determinant;
  report.theta = spec.theta;
  report.profile_hash =
      spec.squared_damping ? profile_hash(*spec.squared_damping) : "none";
  return report;
}

}  // namespace specdet
