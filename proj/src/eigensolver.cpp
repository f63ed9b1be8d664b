#include "specdet/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "specdet/ode.hpp"

namespace specdet {

namespace {

constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Shooting for the characteristic function and its lambda-derivatives.
// ---------------------------------------------------------------------------

LinearSystem<Complex> jet_system(const ProblemSpec& spec, Complex lambda,
                                 int order) {
  LinearSystem<Complex> sys;
  sys.dimension = 2 * (order + 1);
  sys.x0 = 0.0;
  sys.x1 = spec.T;
  const CoefficientProfile damping = spec.damping;
  const std::optional<CoefficientProfile> potential = spec.potential;
  sys.rhs = [damping, potential, lambda, order](
                double x, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
    const double a = evaluate(damping, x);
    const double b = potential ? evaluate(*potential, x) : 0.0;
    const Complex q = lambda * lambda + 2.0 * a * lambda - b;
    dy[0] = y[1];
    dy[1] = q * y[0];
    if (order >= 1) {
      const Complex q_l = 2.0 * lambda + 2.0 * a;
      dy[2] = y[3];
      dy[3] = q * y[2] + q_l * y[0];
      if (order >= 2) {
        dy[4] = y[5];
        dy[5] = q * y[4] + 2.0 * q_l * y[2] + 2.0 * y[0];
      }
    }
  };
  return sys;
}

}  // namespace

CharacteristicJet characteristic_jet(const ProblemSpec& spec, Complex lambda,
                                     int order, double ode_tol) {
  const auto sys = jet_system(spec, lambda, order);
  Eigen::VectorXcd y0 = Eigen::VectorXcd::Zero(sys.dimension);
  y0[1] = 1.0;
  const auto out = integrate_with_rescaling(sys, std::move(y0), ode_tol);
  CharacteristicJet jet;
  jet.f = out.value[0];
  jet.df = order >= 1 ? out.value[2] : Complex(0, 0);
  jet.d2f = order >= 2 ? out.value[4] : Complex(0, 0);
  jet.log_scale = out.log_scale;
  jet.state_norm = std::hypot(std::abs(out.value[0]), std::abs(out.value[1]));
  return jet;
}

ScaledComplex characteristic(const ProblemSpec& spec, Complex lambda) {
  const auto jet = characteristic_jet(spec, lambda, 0, spec.tol.ode_tol);
  return {jet.f, jet.log_scale};
}

Complex characteristic_derivative(const ProblemSpec& spec, Complex lambda) {
  const auto jet = characteristic_jet(spec, lambda, 1, spec.tol.ode_tol);
  return jet.df * std::exp(jet.log_scale);
}

double characteristic_residual(const ProblemSpec& spec, Complex lambda) {
  const auto jet = characteristic_jet(spec, lambda, 0, spec.tol.ode_tol);
  const double denom = std::max(jet.state_norm, 1e-300);
  return std::abs(jet.f) / denom;
}

double search_radius(const ProblemSpec& spec) {
  double r = 2.0 * max_abs_bound(spec.damping) + 1.0 / spec.T + 1.0;
  if (spec.potential) r += std::sqrt(max_abs_bound(*spec.potential));
  return r;
}

// ---------------------------------------------------------------------------
// Argument-principle counting.
// ---------------------------------------------------------------------------

namespace {

struct ContourNearZero {};  // internal retry signal

struct PhasePoint {
  Complex z;
  Complex v;  // representative of F(z); positive rescale keeps arg(v) = arg(F)
};

class WindingWalker {
 public:
  WindingWalker(const ProblemSpec& spec, double ode_tol, double near_measure)
      : spec_(spec), ode_tol_(ode_tol), near_measure_(near_measure) {}

  PhasePoint sample(Complex z) const {
    const auto jet = characteristic_jet(spec_, z, 0, ode_tol_);
    const double denom =
        std::abs(jet.f) * std::max(1.0, std::abs(z)) + jet.state_norm;
    const double measure =
        std::abs(jet.f) * std::max(1.0, std::abs(z)) / std::max(denom, 1e-300);
    if (measure < near_measure_) throw ContourNearZero{};
    return {z, jet.f};
  }

  // Accumulated argument change of F along the straight segment za -> zb.
  double segment_delta(const PhasePoint& a, const PhasePoint& b) const {
    struct Item {
      PhasePoint a, b;
      int depth;
    };
    double total = 0.0;
    std::vector<Item> stack{{a, b, 36}};
    while (!stack.empty()) {
      Item it = stack.back();
      stack.pop_back();
      const double d = std::arg(it.b.v / it.a.v);
      if (std::abs(d) <= kPi / 2.0) {
        total += d;
        continue;
      }
      if (it.depth <= 0) throw ContourNearZero{};
      const PhasePoint m = sample(0.5 * (it.a.z + it.b.z));
      stack.push_back({it.a, m, it.depth - 1});
      stack.push_back({m, it.b, it.depth - 1});
    }
    return total;
  }

  // Argument change over a polyline given by corner samples.
  double polyline_delta(Complex za, Complex zb, int initial_points) const {
    std::vector<PhasePoint> pts;
    pts.reserve(initial_points);
    for (int i = 0; i < initial_points; ++i) {
      const double t = static_cast<double>(i) / (initial_points - 1);
      pts.push_back(sample(za + t * (zb - za)));
    }
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      total += segment_delta(pts[i], pts[i + 1]);
    }
    return total;
  }

  int winding(const Rect& r) const {
    const Complex c0(r.re_lo, r.im_lo), c1(r.re_hi, r.im_lo);
    const Complex c2(r.re_hi, r.im_hi), c3(r.re_lo, r.im_hi);
    const double T = spec_.T;
    auto npts = [T](Complex a, Complex b) {
      return 2 + static_cast<int>(std::ceil(std::abs(b - a) * T / (kPi / 2)));
    };
    double total = polyline_delta(c0, c1, npts(c0, c1)) +
                   polyline_delta(c1, c2, npts(c1, c2)) +
                   polyline_delta(c2, c3, npts(c2, c3)) +
                   polyline_delta(c3, c0, npts(c3, c0));
    const double w = total / (2.0 * kPi);
    const double rounded = std::round(w);
    if (std::abs(w - rounded) > 0.25) throw ContourNearZero{};
    return static_cast<int>(rounded);
  }

 private:
  const ProblemSpec& spec_;
  double ode_tol_;
  double near_measure_;
};

// Counting with escalating outward nudges; `nudge_growth` = 1 keeps the
// spec'd fixed 10*root_tol shifts of the public operation.
int count_with_nudges(const ProblemSpec& spec, Rect rect, double ode_tol,
                      double near_measure, double base_nudge,
                      double nudge_growth) {
  WindingWalker walker(spec, ode_tol, near_measure);
  double shift = base_nudge;
  Rect r = rect;
  for (int attempt = 0; attempt <= 8; ++attempt) {
    try {
      return walker.winding(r);
    } catch (const ContourNearZero&) {
      r.re_lo -= shift;
      r.re_hi += shift;
      r.im_lo -= shift;
      r.im_hi += shift;
      shift *= nudge_growth;
    }
  }
  throw IsolationError("argument-principle contour too close to a zero", rect);
}

}  // namespace

int count_in_rectangle(const ProblemSpec& spec, Rect rect) {
  if (!(rect.re_lo < rect.re_hi) || !(rect.im_lo < rect.im_hi)) {
    throw std::invalid_argument("count_in_rectangle: degenerate rectangle");
  }
  // detection threshold above the integration noise floor but low enough
  // that the fixed 10*root_tol shifts can clear a zero sitting on the
  // contour within the 8 attempts
  const double near_measure =
      std::max(3.0 * spec.tol.ode_tol, 10.0 * spec.tol.root_tol);
  return count_with_nudges(spec, rect, spec.tol.ode_tol, near_measure,
                           10.0 * spec.tol.root_tol, 1.0);
}

// ---------------------------------------------------------------------------
// Root isolation and refinement.
// ---------------------------------------------------------------------------

namespace {

// Loose integration tolerance for contour walks; refinement re-integrates at
// the spec tolerance.
constexpr double kCountTol = 1e-6;

struct Located {
  Complex lambda;
  int multiplicity = 1;
  double residual = 0.0;
};

class SpectrumSearch {
 public:
  SpectrumSearch(const ProblemSpec& spec, double count_tol = kCountTol)
      : spec_(spec),
        root_tol_(spec.tol.root_tol),
        ode_tol_(spec.tol.ode_tol),
        count_tol_(count_tol),
        min_box_(std::max(1e3 * spec.tol.root_tol, 1e-7)) {}

  int coarse_count(Rect r) const {
    return count_with_nudges(spec_, r, count_tol_, 3.0 * count_tol_,
                             std::max(10.0 * root_tol_, 1e-7), 3.0);
  }

  void locate(Rect box, int n, std::vector<Located>& out, int depth) const {
    if (n == 0) return;
    const double w = box.re_hi - box.re_lo;
    const double h = box.im_hi - box.im_lo;
    if (n == 1 && std::hypot(w, h) <= 0.3 * kPi / spec_.T) {
      Complex center(0.5 * (box.re_lo + box.re_hi),
                     0.5 * (box.im_lo + box.im_hi));
      if (auto loc = try_newton(center, box)) {
        out.push_back(*loc);
        return;
      }
      // fall through to further bisection on Newton failure
    }
    if (n >= 2 && std::max(w, h) <= 0.1 * kPi / spec_.T) {
      // below this scale counting degrades near a multiple zero; switch to
      // critical-point refinement with a quadratic split test
      if (n == 2) {
        refine_cluster_pair(box, out);
        return;
      }
      throw RefinementError(
          "unresolved root cluster of count " + std::to_string(n), box);
    }
    if (std::max(w, h) <= min_box_) {
      throw RefinementError("root could not be refined in minimal box", box);
    }
    if (depth <= 0) {
      throw IsolationError("isolation recursion depth exhausted", box);
    }
    split(box, n, out, depth);
  }

  // Newton refinement of a simple root from `start`; escape-guarded. For
  // rough (kinked) profiles the integration noise floor can exceed
  // root_tol; once the steps stop contracting the iterate is orbiting the
  // root at noise radius and the best point seen is accepted.
  std::optional<Located> try_newton(Complex start, Rect box) const {
    const double limit =
        std::hypot(box.re_hi - box.re_lo, box.im_hi - box.im_lo) +
        0.5 * kPi / spec_.T;
    const double stagnation_accept = std::max(1e4 * root_tol_, 1e-6);
    Complex z = start;
    Complex best = start;
    double best_step = std::numeric_limits<double>::infinity();
    int since_best = 0;
    for (int it = 0; it < 60; ++it) {
      const auto jet = characteristic_jet(spec_, z, 1, ode_tol_);
      if (jet.df == Complex(0, 0)) return std::nullopt;
      const Complex step = jet.f / jet.df;
      z -= step;
      if (std::abs(z - start) > limit) return std::nullopt;
      const double s = std::abs(step);
      if (s <= root_tol_) {
        return Located{z, 1, characteristic_residual(spec_, z)};
      }
      if (s < best_step) {
        best_step = s;
        best = z;
        since_best = 0;
      } else if (++since_best >= 8 && best_step <= stagnation_accept) {
        return Located{best, 1, characteristic_residual(spec_, best)};
      }
    }
    return std::nullopt;
  }

  // Two located roots closer than the noise-resolution limit: treat as one
  // multiplicity-2 root and snap to the critical point of F.
  Located merge_unresolved(Complex guess, int multiplicity) const {
    Complex z = guess;
    for (int it = 0; it < 60; ++it) {
      const auto jet = characteristic_jet(spec_, z, 2, ode_tol_);
      if (jet.d2f == Complex(0, 0)) break;
      const Complex step = jet.df / jet.d2f;
      z -= step;
      if (std::abs(step) <= root_tol_) break;
    }
    return {z, multiplicity, characteristic_residual(spec_, z)};
  }

  // A count-2 box: either an exceptional double root or a close pair.
  // Newton on F' finds the critical point; the local quadratic model
  // F ~ F(z) + F''(z)(l - z)^2 / 2 then predicts the pair offsets.
  void refine_cluster_pair(Rect box, std::vector<Located>& out) const {
    Complex z(0.5 * (box.re_lo + box.re_hi), 0.5 * (box.im_lo + box.im_hi));
    bool converged = false;
    for (int it = 0; it < 60; ++it) {
      const auto jet = characteristic_jet(spec_, z, 2, ode_tol_);
      if (jet.d2f == Complex(0, 0)) break;
      const Complex step = jet.df / jet.d2f;
      z -= step;
      if (std::abs(step) <= root_tol_) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw RefinementError("critical-point refinement did not converge", box);
    }
    const auto jet = characteristic_jet(spec_, z, 2, ode_tol_);
    if (jet.d2f != Complex(0, 0)) {
      const Complex dir = std::sqrt(-2.0 * jet.f / jet.d2f);
      // Integration noise eta splits an exact double root into two simple
      // zeros of the computed F about sqrt(eta/|F''|) apart; pairs below
      // this resolution limit are reported as one multiplicity-2 root.
      const double split_scale = std::max(1e3 * root_tol_, 1e-5);
      if (std::abs(dir) >= split_scale) {
        const double w = 3.0 * std::abs(dir);
        const Rect window{z.real() - w, z.real() + w, z.imag() - w,
                          z.imag() + w};
        auto p1 = try_newton(z + dir, window);
        auto p2 = try_newton(z - dir, window);
        if (p1 && p2 &&
            std::abs(p1->lambda - p2->lambda) >
                std::max(0.5 * std::abs(dir), split_scale)) {
          out.push_back(*p1);
          out.push_back(*p2);
          return;
        }
      }
    }
    out.push_back(Located{z, 2, characteristic_residual(spec_, z)});
  }

 private:
  void split(Rect box, int n, std::vector<Located>& out, int depth) const {
    const double w = box.re_hi - box.re_lo;
    const double h = box.im_hi - box.im_lo;
    for (int s = 0; s < 9; ++s) {
      const bool split_re = (s < 5) == (w >= h);  // other axis after 5 tries
      const double len = split_re ? w : h;
      const double base = split_re ? 0.5 * (box.re_lo + box.re_hi)
                                   : 0.5 * (box.im_lo + box.im_hi);
      const int k = s < 5 ? (s + 1) / 2 : (s - 4) / 2;
      const double sign = (s % 2 == 1) ? 1.0 : -1.0;
      const double mid = base + sign * k * len / 16.0;
      Rect a = box, b = box;
      if (split_re) {
        a.re_hi = mid;
        b.re_lo = mid;
      } else {
        a.im_hi = mid;
        b.im_lo = mid;
      }
      int na, nb;
      try {
        na = coarse_count(a);
        nb = coarse_count(b);
      } catch (const IsolationError&) {
        continue;
      }
      if (na + nb != n) continue;  // winding slip across the shared line
      locate(a, na, out, depth - 1);
      locate(b, nb, out, depth - 1);
      return;
    }
    throw IsolationError("could not find a clean subdivision line", box);
  }

  const ProblemSpec& spec_;
  double root_tol_;
  double ode_tol_;
  double count_tol_;
  double min_box_;
};

}  // namespace

std::vector<Complex> model_spectrum(const ProblemSpec& spec, int j_max) {
  if (spec.potential) {
    throw std::invalid_argument("model_spectrum: asymptotics assume b == 0");
  }
  if (j_max < 1) throw std::invalid_argument("model_spectrum: j_max >= 1");
  const double ma = mean(spec.damping);
  const double ms = mean_square(spec.damping);
  std::vector<Complex> out;
  out.reserve(j_max);
  for (int j = 1; j <= j_max; ++j) {
    out.emplace_back(-ma,
                     j * kPi / spec.T - ms * spec.T / (2.0 * kPi * j));
  }
  return out;
}

Spectrum find_spectrum(const ProblemSpec& spec, double strip_height) {
  if (!(strip_height > 0.0)) {
    throw std::invalid_argument("find_spectrum: strip height must be > 0");
  }
  const double T = spec.T;
  const double root_tol = spec.tol.root_tol;
  const SpectrumSearch search(spec);

  double radius = search_radius(spec);
  const double band = 0.25 * kPi / T;
  const double amax = max_abs_bound(spec.damping);
  const int j_switch = std::max(
      8, static_cast<int>(std::ceil((2.0 * amax + 1.0 / T + 1.0) * T / kPi)) +
             1);
  const bool pure_isolation = spec.potential.has_value();
  const double im_top =
      pure_isolation ? strip_height
                     : std::min(strip_height, (j_switch + 0.5) * kPi / T);

  // Low region: full isolation over [-R, R] x [-band, im_top]. The outer
  // annuli validate the heuristic radius; a nonzero count doubles it once.
  std::vector<Located> roots;
  for (int pass = 0;; ++pass) {
    const Rect left{-radius - 1.5, -radius, -band, im_top};
    const Rect right{radius, radius + 1.5, -band, im_top};
    if (search.coarse_count(left) == 0 && search.coarse_count(right) == 0) {
      break;
    }
    if (pass >= 2) {
      throw IsolationError("search radius validation failed",
                           Rect{-radius, radius, -band, im_top});
    }
    radius *= 2.0;
  }
  {
    const Rect low{-radius, radius, -band, im_top};
    search.locate(low, search.coarse_count(low), roots, 80);
  }

  // High region: Newton from the asymptotic model, j by j.
  if (!pure_isolation && strip_height > im_top - 0.49 * kPi / T) {
    const double ma = mean(spec.damping);
    const double ms = mean_square(spec.damping);
    std::vector<Rect> fallback;
    const int j_start = std::max(
        1, static_cast<int>(std::floor(im_top * T / kPi)) - 1);
    for (int j = j_start;; ++j) {
      const double im_model = j * kPi / T - ms * T / (2.0 * kPi * j);
      if (im_model > strip_height + 0.45 * kPi / T) break;
      if (im_model <= im_top - 0.45 * kPi / T) continue;
      const Complex guess(-ma, im_model);
      const Rect window{-radius, radius, im_model - 0.49 * kPi / T,
                        im_model + 0.49 * kPi / T};
      auto loc = search.try_newton(guess, Rect{guess.real() - 0.1,
                                               guess.real() + 0.1,
                                               guess.imag() - 0.1,
                                               guess.imag() + 0.1});
      if (loc && std::abs(loc->lambda - guess) <= 0.49 * kPi / T) {
        roots.push_back(*loc);
      } else {
        fallback.push_back(window);
      }
    }
    // contour counting high in the strip needs the tight tolerance
    const SpectrumSearch high_search(spec, std::min(kCountTol, spec.tol.ode_tol));
    for (const Rect& box : fallback) {
      Rect clipped = box;
      clipped.im_lo = std::max(clipped.im_lo, -band);
      high_search.locate(clipped, high_search.coarse_count(clipped), roots, 60);
    }
  }

  // Strip filter, dedupe, classification, conjugate completion. Roots the
  // search regions re-found are collapsed; distinct roots inside the
  // noise-resolution limit are merged as one multiple root.
  const double margin = 20.0 * root_tol;
  const double real_thr = 100.0 * root_tol;
  const double same_root_r = 100.0 * root_tol;
  const double cluster_r = std::max(1e3 * root_tol, 1e-5);

  std::vector<Located> kept;
  for (const auto& r : roots) {
    if (std::abs(r.lambda.imag()) > strip_height + margin) continue;
    if (std::abs(r.lambda.real()) > radius + margin) continue;
    bool dup = false;
    for (auto& k : kept) {
      const double dist = std::abs(k.lambda - r.lambda);
      if (dist < same_root_r) {
        k.multiplicity = std::max(k.multiplicity, r.multiplicity);
        dup = true;
        break;
      }
      if (dist < cluster_r) {
        k = search.merge_unresolved(0.5 * (k.lambda + r.lambda),
                                    k.multiplicity + r.multiplicity);
        dup = true;
        break;
      }
    }
    if (!dup) kept.push_back(r);
  }

  std::vector<EigenvalueRecord> records;
  std::vector<Located> uppers;
  for (const auto& r : kept) {
    if (r.lambda.imag() > real_thr) {
      uppers.push_back(r);
    } else if (r.lambda.imag() < -real_thr) {
      // conjugate partner of an upper root caught inside the band sliver
      const Complex up = std::conj(r.lambda);
      bool have = false;
      for (const auto& u : uppers) {
        if (std::abs(u.lambda - up) < same_root_r) {
          have = true;
          break;
        }
      }
      if (!have) {
        uppers.push_back(
            Located{up, r.multiplicity, characteristic_residual(spec, up)});
      }
    } else {
      EigenvalueRecord rec;
      rec.value = r.lambda;
      rec.multiplicity = r.multiplicity;
      rec.residual = r.residual;
      rec.cls = r.lambda.real() > 0.0 ? EigenvalueClass::RealPositive
                                      : EigenvalueClass::RealNegative;
      records.push_back(rec);
    }
  }
  // guard against an upper/band double-find across region boundaries
  std::sort(uppers.begin(), uppers.end(), [](const auto& a, const auto& b) {
    return a.lambda.imag() < b.lambda.imag();
  });
  for (std::size_t i = 0; i < uppers.size(); ++i) {
    if (i > 0 &&
        std::abs(uppers[i].lambda - uppers[i - 1].lambda) < same_root_r) {
      continue;
    }
    const auto& u = uppers[i];
    records.push_back(
        {u.lambda, u.multiplicity, EigenvalueClass::Upper, u.residual});
    const Complex down = std::conj(u.lambda);
    records.push_back({down, u.multiplicity, EigenvalueClass::Lower,
                       characteristic_residual(spec, down)});
  }

  std::sort(records.begin(), records.end(),
            [](const EigenvalueRecord& a, const EigenvalueRecord& b) {
              if (a.value.imag() != b.value.imag()) {
                return a.value.imag() < b.value.imag();
              }
              return a.value.real() < b.value.real();
            });

  Spectrum sp;
  sp.records = std::move(records);
  sp.strip_height = strip_height;
  for (const auto& rec : sp.records) {
    if (rec.cls == EigenvalueClass::RealPositive) sp.card_I1 += rec.multiplicity;
    if (rec.cls == EigenvalueClass::RealNegative) sp.card_I2 += rec.multiplicity;
  }
  return sp;
}

std::vector<AsymptoticResidualRow> asymptotic_residuals(
    const Spectrum& spectrum, const ProblemSpec& spec) {
  if (spec.potential) {
    throw std::invalid_argument("asymptotic_residuals: requires b == 0");
  }
  const double ma = mean(spec.damping);
  const double ms = mean_square(spec.damping);
  const double T = spec.T;
  auto model_im = [&](int j) {
    return j * kPi / T - ms * T / (2.0 * kPi * j);
  };

  std::vector<const EigenvalueRecord*> uppers;
  for (const auto& r : spectrum.records) {
    if (r.cls == EigenvalueClass::Upper) uppers.push_back(&r);
  }

  const int j_max = static_cast<int>(
      std::ceil(spectrum.strip_height * T / kPi)) + 2;
  std::vector<int> match(uppers.size(), 0);
  for (std::size_t i = 0; i < uppers.size(); ++i) {
    int best_j = 1;
    double best = std::abs(uppers[i]->value.imag() - model_im(1));
    for (int j = 2; j <= j_max; ++j) {
      const double d = std::abs(uppers[i]->value.imag() - model_im(j));
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    match[i] = best_j;
  }

  std::vector<AsymptoticResidualRow> rows;
  for (std::size_t i = 0; i < uppers.size(); ++i) {
    AsymptoticResidualRow row;
    row.j = match[i];
    row.re_residual = std::abs(uppers[i]->value.real() + ma);
    row.im_residual = std::abs(uppers[i]->value.imag() - match[i] * kPi / T +
                               ms * T / (2.0 * kPi * match[i]));
    for (std::size_t k = 0; k < uppers.size(); ++k) {
      if (k != i && match[k] == match[i]) {
        // index collision: the smaller |Re| difference keeps the index,
        // the losing row is flagged
        const double mine = std::abs(uppers[i]->value.real() + ma);
        const double theirs = std::abs(uppers[k]->value.real() + ma);
        if (mine > theirs || (mine == theirs && i > k)) row.ambiguous = true;
      }
    }
    rows.push_back(row);
  }
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.j < b.j; });
  return rows;
}

}  // namespace specdet
