#ifndef KK_FIELDS_HPP
#define KK_FIELDS_HPP

#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kk/expression.hpp"
#include "kk/fd.hpp"
#include "kk/linalg.hpp"

namespace kk {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Global scenario constants and solver knobs. c = 1 units throughout.
struct ScenarioConfig {
  double beta = 1.0;      // gauge coupling, inverse length per charge unit
  double a0 = 1.0;        // reference value of the fiber scale a
  double hbar = 0.0;      // 0 selects purely classical runs
  int epsilon = 1;        // normalization of the bundle tangent / field: -1, 0, 1
  int varepsilon = 1;     // sign of the conformal-square in the base block: -1, +1
  int base_dim = 2;       // spacetime dimension d (2, 3 or 4)
  bool fiber_compact = true;  // U(1) fiber, period 2*pi; false = noncompact line

  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double fd_step = 0.0;  // 0 = eps^(1/3)*(1+|x|) per coordinate
  int fd_order = 4;      // first-derivative stencil order for metric/field FD

  double norm_drift_bound = 1e-8;  // |g(v,v) - target| allowed along trajectories
  double r_drift_bound = 1e-9;     // relative drift of the charge ratio

  void validate() const {
    if (!(beta > 0)) throw ConfigError("constants.beta must be > 0");
    if (!(a0 > 0)) throw ConfigError("constants.a0 must be > 0");
    if (!(hbar >= 0)) throw ConfigError("constants.hbar must be >= 0");
    if (epsilon < -1 || epsilon > 1) throw ConfigError("constants.epsilon must be -1, 0 or 1");
    if (varepsilon != -1 && varepsilon != 1)
      throw ConfigError("constants.varepsilon must be -1 or +1");
    if (base_dim < 2 || base_dim > 4) throw ConfigError("constants.base_dim must be 2, 3 or 4");
    if (!(abs_tol > 0) || !(rel_tol > 0)) throw ConfigError("run tolerances must be > 0");
  }

  double fd_step_at(double x) const { return fd_step > 0 ? fd_step : fd::default_step(x); }
};

using Point = std::span<const double>;  // base point, base_dim coordinates

// Scalar field on the base. Exact gradient optional; finite differences
// otherwise (order and step from the config at the call site).
struct ScalarField {
  std::function<double(Point)> value;
  std::function<Vec(Point)> gradient;  // may be null

  double operator()(Point x) const { return value(x); }
  bool has_gradient() const { return static_cast<bool>(gradient); }

  Vec grad(Point x, const ScenarioConfig& cfg) const {
    if (gradient) return gradient(x);
    const int d = static_cast<int>(x.size());
    Vec g(d);
    std::vector<double> xx(x.begin(), x.end());
    for (int mu = 0; mu < d; ++mu) {
      double h = cfg.fd_step_at(x[mu]);
      double save = xx[mu];
      auto f = [&](double s) {
        xx[mu] = s;
        return value(xx);
      };
      g[mu] = fd::deriv1(f, save, h, cfg.fd_order);
      xx[mu] = save;
    }
    return g;
  }
};

// Covector field A_mu. Exact Jacobian d_mu A_nu optional.
struct CovectorField {
  std::function<Vec(Point)> value;
  std::function<Mat(Point)> jacobian;  // (mu,nu) -> d_mu A_nu; may be null

  Vec operator()(Point x) const { return value(x); }
  bool has_jacobian() const { return static_cast<bool>(jacobian); }

  Mat jac(Point x, const ScenarioConfig& cfg) const {
    const int d = static_cast<int>(x.size());
    if (jacobian) return jacobian(x);
    Mat j(d);
    std::vector<double> xx(x.begin(), x.end());
    for (int mu = 0; mu < d; ++mu) {
      double h = cfg.fd_step_at(x[mu]);
      double save = xx[mu];
      for (int nu = 0; nu < d; ++nu) {
        auto f = [&](double s) {
          xx[mu] = s;
          return value(xx)[nu];
        };
        j(mu, nu) = fd::deriv1(f, save, h, cfg.fd_order);
        xx[mu] = save;
      }
    }
    return j;
  }
};

// Metric field g_{mu nu}(x). Exact derivative d_lam g_{mu nu} optional.
struct MetricField {
  std::function<Mat(Point)> value;
  std::function<Ten3(Point)> derivative;  // (lam,mu,nu); may be null

  Mat operator()(Point x) const { return value(x); }
  bool has_derivative() const { return static_cast<bool>(derivative); }

  Ten3 deriv(Point x, const ScenarioConfig& cfg) const {
    const int d = static_cast<int>(x.size());
    if (derivative) return derivative(x);
    Ten3 t(d);
    std::vector<double> xx(x.begin(), x.end());
    for (int lam = 0; lam < d; ++lam) {
      double h = cfg.fd_step_at(x[lam]);
      double save = xx[lam];
      for (int mu = 0; mu < d; ++mu)
        for (int nu = mu; nu < d; ++nu) {
          auto f = [&](double s) {
            xx[lam] = s;
            return value(xx)(mu, nu);
          };
          double v = fd::deriv1(f, save, h, cfg.fd_order);
          t(lam, mu, nu) = v;
          t(lam, nu, mu) = v;
          xx[lam] = save;
        }
    }
    return t;
  }
};

// The scalar a, gauge potential A and Jordan base metric g0 of a scenario.
struct FieldBundle {
  int dim = 2;  // base dimension d
  ScalarField a;
  CovectorField A;
  MetricField g0;

  double scalar_a(Point x) const {
    double v = a.value(x);
    if (!(v > 0)) throw DomainError("scalar field a(x) must be positive");
    return v;
  }

  // Lazy Lorentzian-signature check: exactly one positive eigenvalue.
  void check_signature(Point x) const {
    Mat g = g0(x);
    if (g.sym_defect() > 1e-12 * (1.0 + g.max_abs()))
      throw DomainError("base metric g0 is not symmetric at a sampled point");
    Vec ev = sym_eigenvalues(g);
    int pos = 0;
    for (int i = 0; i < ev.size(); ++i)
      if (ev[i] > 0) ++pos;
    if (pos != 1) throw DomainError("base metric g0 is not Lorentzian (+-...-) at a sampled point");
  }
};

// ---------------------------------------------------------------------------
// Named analytic families (exact derivatives) and expression-backed fields.

inline ScalarField constant_scalar(double c) {
  return {[c](Point) { return c; },
          [](Point x) { return Vec(static_cast<int>(x.size())); }};
}

// base*(1 + amp*sin(k*x_coord + phase))
inline ScalarField sinusoidal_scalar(double base, double amp, double k, int coord,
                                     double phase = 0) {
  return {[=](Point x) { return base * (1.0 + amp * std::sin(k * x[coord] + phase)); },
          [=](Point x) {
            Vec g(static_cast<int>(x.size()));
            g[coord] = base * amp * k * std::cos(k * x[coord] + phase);
            return g;
          }};
}

// base + slope*x_coord
inline ScalarField linear_scalar(double base, double slope, int coord) {
  return {[=](Point x) { return base + slope * x[coord]; },
          [=](Point x) {
            Vec g(static_cast<int>(x.size()));
            g[coord] = slope;
            return g;
          }};
}

// base + amp*exp(-(x_coord-center)^2/(2 width^2))
inline ScalarField gaussian_bump_scalar(double base, double amp, double center, double width,
                                        int coord) {
  return {[=](Point x) {
            double u = (x[coord] - center) / width;
            return base + amp * std::exp(-0.5 * u * u);
          },
          [=](Point x) {
            Vec g(static_cast<int>(x.size()));
            double u = (x[coord] - center) / width;
            g[coord] = -amp * std::exp(-0.5 * u * u) * u / width;
            return g;
          }};
}

inline ScalarField expression_scalar(const Expression& e) {
  bool constant = e.is_constant();
  ScalarField f;
  f.value = [e](Point x) {
    Expression::Vars v{};
    for (size_t i = 0; i < x.size() && i < 4; ++i) v[i] = x[i];
    return e.eval(v);
  };
  if (constant)
    f.gradient = [](Point x) { return Vec(static_cast<int>(x.size())); };
  return f;
}

// Covector assembled from per-component scalar fields.
inline CovectorField covector_from_components(std::vector<ScalarField> comps) {
  auto shared = std::make_shared<std::vector<ScalarField>>(std::move(comps));
  CovectorField A;
  A.value = [shared](Point x) {
    Vec v(static_cast<int>(shared->size()));
    for (size_t nu = 0; nu < shared->size(); ++nu) v[static_cast<int>(nu)] = (*shared)[nu].value(x);
    return v;
  };
  bool all_exact = true;
  for (const auto& c : *shared)
    if (!c.has_gradient()) all_exact = false;
  if (all_exact) {
    A.jacobian = [shared](Point x) {
      const int d = static_cast<int>(x.size());
      Mat j(d);
      for (int nu = 0; nu < static_cast<int>(shared->size()); ++nu) {
        Vec g = (*shared)[nu].gradient(x);
        for (int mu = 0; mu < d; ++mu) j(mu, nu) = g[mu];
      }
      return j;
    };
  }
  return A;
}

inline MetricField minkowski_metric(int d) {
  return {[d](Point) {
            Mat g(d);
            g(0, 0) = 1.0;
            for (int i = 1; i < d; ++i) g(i, i) = -1.0;
            return g;
          },
          [d](Point) { return Ten3(d); }};
}

// Metric from a symmetric array of scalar components.
inline MetricField metric_from_components(int d, std::vector<std::vector<ScalarField>> comps) {
  auto shared = std::make_shared<std::vector<std::vector<ScalarField>>>(std::move(comps));
  MetricField g;
  g.value = [shared, d](Point x) {
    Mat m(d);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        double v = (*shared)[i][j].value(x);
        m(i, j) = v;
        m(j, i) = v;
      }
    return m;
  };
  bool all_exact = true;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j)
      if (!(*shared)[i][j].has_gradient()) all_exact = false;
  if (all_exact) {
    g.derivative = [shared, d](Point x) {
      Ten3 t(d);
      for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
          Vec gr = (*shared)[i][j].gradient(x);
          for (int lam = 0; lam < d; ++lam) {
            t(lam, i, j) = gr[lam];
            t(lam, j, i) = gr[lam];
          }
        }
      return t;
    };
  }
  return g;
}

// Conformally scaled metric factor^2(x) * g(x) with exact chain rule when
// both pieces carry exact derivatives.
inline MetricField conformal_metric(MetricField base, ScalarField factor2) {
  auto b = std::make_shared<MetricField>(std::move(base));
  auto f = std::make_shared<ScalarField>(std::move(factor2));
  MetricField g;
  g.value = [b, f](Point x) {
    Mat m = b->value(x);
    m *= f->value(x);
    return m;
  };
  if (b->has_derivative() && f->has_gradient()) {
    g.derivative = [b, f](Point x) {
      const int d = static_cast<int>(x.size());
      Mat m = b->value(x);
      Ten3 dm = b->derivative(x);
      double w = f->value(x);
      Vec dw = f->gradient(x);
      Ten3 t(d);
      for (int lam = 0; lam < d; ++lam)
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) t(lam, i, j) = dw[lam] * m(i, j) + w * dm(lam, i, j);
      return t;
    };
  }
  return g;
}

}  // namespace kk

#endif
