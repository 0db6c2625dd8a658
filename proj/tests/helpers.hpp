#ifndef KK_TESTS_HELPERS_HPP
#define KK_TESTS_HELPERS_HPP

#include <cmath>

#include "kk/dynamics.hpp"
#include "kk/geometry.hpp"

// Shared scenario builders for the test suites.

namespace kkt {

using namespace kk;

inline FieldBundle flat_fields(int d) {
  FieldBundle f;
  f.dim = d;
  f.a = constant_scalar(1.0);
  std::vector<ScalarField> A;
  for (int i = 0; i < d; ++i) A.push_back(constant_scalar(0.0));
  f.A = covector_from_components(std::move(A));
  f.g0 = minkowski_metric(d);
  return f;
}

// a(x) = a0 (1 + 0.2 sin x), A_t = 0.1 x, flat g0, d = 2. The workhorse
// varying-scalar scenario.
inline FieldBundle varying_fields(double a0 = 1.0) {
  FieldBundle f;
  f.dim = 2;
  f.a = sinusoidal_scalar(a0, 0.2, 1.0, 1);
  f.A = covector_from_components({linear_scalar(0.0, 0.1, 1), constant_scalar(0.0)});
  f.g0 = minkowski_metric(2);
  return f;
}

// Constant scalar, uniform electric field E (A_t = -E x), d = 2.
inline FieldBundle uniform_field(double E, double a_const = 1.0) {
  FieldBundle f;
  f.dim = 2;
  f.a = constant_scalar(a_const);
  f.A = covector_from_components({linear_scalar(0.0, -E, 1), constant_scalar(0.0)});
  f.g0 = minkowski_metric(2);
  return f;
}

// Closed-form hyperbolic motion: LFE in g_r = Om^2 eta (Om const) with
// uniform F_{tx} = E and charge ratio r, from x0 with rapidity theta0:
//   u(s) = (cosh(k s + th0), sinh(k s + th0)) / Om,   k = r E / Om^2.
struct HyperbolicOracle {
  double E, r, om, theta0;
  double t0, x0;

  double kappa() const { return r * E / (om * om); }
  void velocity(double s, double& ut, double& ux) const {
    ut = std::cosh(kappa() * s + theta0) / om;
    ux = std::sinh(kappa() * s + theta0) / om;
  }
  void position(double s, double& t, double& x) const {
    double k = kappa();
    t = t0 + (std::sinh(k * s + theta0) - std::sinh(theta0)) / (om * k);
    x = x0 + (std::cosh(k * s + theta0) - std::cosh(theta0)) / (om * k);
  }
};

}  // namespace kkt

#endif
