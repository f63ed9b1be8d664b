#pragma once

#include <functional>

namespace specdet {

// Adaptive Simpson quadrature with absolute tolerance and a subdivision cap.
// Intended for continuous integrands on short intervals; throws
// std::runtime_error if the cap is reached before the tolerance is met.
double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double abs_tol = 1e-10, int max_depth = 48);

}  // namespace specdet
