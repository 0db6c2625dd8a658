#ifndef KK_FD_HPP
#define KK_FD_HPP

#include <cmath>
#include <limits>

// Central finite-difference stencils. Step defaults follow the rule
// h = eps^(1/3) * (1 + |x|) unless the caller overrides it.

namespace kk::fd {

inline double default_step(double x) {
  static const double h0 = std::cbrt(std::numeric_limits<double>::epsilon());
  return h0 * (1.0 + std::abs(x));
}

// Step for second-derivative stencils (test helpers, d'Alembertians).
inline double default_step2(double x) {
  static const double h0 = std::pow(std::numeric_limits<double>::epsilon(), 0.25);
  return h0 * (1.0 + std::abs(x));
}

// f'(x), order-2 or order-4 central stencil.
template <class F>
double deriv1(F&& f, double x, double h, int order = 4) {
  if (order <= 2) return (f(x + h) - f(x - h)) / (2.0 * h);
  return (-f(x + 2 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2 * h)) / (12.0 * h);
}

// f''(x), order-2 central stencil.
template <class F>
double deriv2(F&& f, double x, double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

}  // namespace kk::fd

#endif
