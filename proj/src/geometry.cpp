#include "kk/geometry.hpp"

#include <cmath>
#include <vector>

namespace kk {

Ten3 christoffel(const MetricOps& ops, Point x) {
  const int n = ops.dim;
  Mat ginv = ops.inverse(x);
  Ten3 dg = ops.derivative(x);
  Ten3 gamma(n);
  for (int lam = 0; lam < n; ++lam)
    for (int mu = 0; mu < n; ++mu)
      for (int nu = mu; nu < n; ++nu) {
        double s = 0;
        for (int rho = 0; rho < n; ++rho)
          s += ginv(lam, rho) * (dg(mu, rho, nu) + dg(nu, rho, mu) - dg(rho, mu, nu));
        s *= 0.5;
        gamma(lam, mu, nu) = s;
        gamma(lam, nu, mu) = s;
      }
  return gamma;
}

namespace {

Mat checked_inverse(const Mat& g, const char* what) {
  double scale = g.max_abs();
  double d = det(g);
  if (!(std::abs(d) > 1e-13 * std::pow(scale, g.size())))
    throw SingularityError(std::string("degenerate metric in ") + what);
  return inverse(g);
}

Ten3 fd_metric_derivative(int dim, const std::function<Mat(Point)>& value,
                          const ScenarioConfig& cfg, Point x) {
  Ten3 t(dim);
  std::vector<double> xx(x.begin(), x.end());
  for (int lam = 0; lam < static_cast<int>(x.size()); ++lam) {
    double h = cfg.fd_step_at(x[lam]);
    double save = xx[lam];
    for (int mu = 0; mu < dim; ++mu)
      for (int nu = mu; nu < dim; ++nu) {
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

}  // namespace

MetricOps fd_metric_ops(int dim, std::function<Mat(Point)> value, const ScenarioConfig& cfg) {
  MetricOps ops;
  ops.dim = dim;
  ops.value = value;
  ops.inverse = [value](Point x) { return checked_inverse(value(x), "metric inverse"); };
  ops.derivative = [dim, value, &cfg](Point x) {
    return fd_metric_derivative(dim, value, cfg, x);
  };
  return ops;
}

Mat field_strength(const FieldBundle& fields, Point x, const ScenarioConfig& cfg) {
  Mat j = fields.A.jac(x, cfg);
  const int d = fields.dim;
  Mat f(d);
  for (int mu = 0; mu < d; ++mu)
    for (int nu = 0; nu < d; ++nu) f(mu, nu) = j(mu, nu) - j(nu, mu);
  return f;
}

// ---------------------------------------------------------------------------

Mat BundleMetric::assemble(Point x) const {
  const int d = base_dim();
  const double a = scalar_a(x);
  const double om = omega_.value(x);
  if (!(om > 0)) throw FrameError("conformal profile Om must be positive");
  const double eps_p = cfg_->varepsilon;
  const double beta = cfg_->beta;
  Mat g0 = fields_->g0(x);
  Vec A = fields_->A(x);

  Mat gt(d + 1);
  const double a2 = a * a;
  const double base_scale = eps_p / (om * om);
  for (int mu = 0; mu < d; ++mu) {
    for (int nu = 0; nu < d; ++nu)
      gt(mu, nu) = base_scale * g0(mu, nu) - a2 * beta * beta * A[mu] * A[nu];
    gt(mu, d) = -a2 * beta * A[mu];
    gt(d, mu) = gt(mu, d);
  }
  gt(d, d) = -a2;
  return gt;
}

Mat BundleMetric::inverse(Point x) const {
  const int d = base_dim();
  const double a = scalar_a(x);
  const double om = omega_.value(x);
  const double eps_p = cfg_->varepsilon;
  const double beta = cfg_->beta;
  Mat g0 = fields_->g0(x);
  {
    // degeneracy guard on the assembled metric
    double dt = det(assemble(x));
    double scale = std::max(assemble(x).max_abs(), 1e-30);
    if (!(std::abs(dt) > 1e-13 * std::pow(scale, d + 1)))
      throw SingularityError("degenerate bundle metric");
  }
  Mat g0inv = checked_inverse(g0, "base metric inverse");
  Vec A = fields_->A(x);

  Vec Aup = g0inv.mul(A);  // g0^{mu nu} A_nu
  double AA = 0;
  for (int mu = 0; mu < d; ++mu) AA += Aup[mu] * A[mu];

  const double s = eps_p * om * om;
  Mat gi(d + 1);
  for (int mu = 0; mu < d; ++mu) {
    for (int nu = 0; nu < d; ++nu) gi(mu, nu) = s * g0inv(mu, nu);
    gi(mu, d) = -s * beta * Aup[mu];
    gi(d, mu) = gi(mu, d);
  }
  gi(d, d) = s * beta * beta * AA - 1.0 / (a * a);
  return gi;
}

bool BundleMetric::has_exact_derivatives() const {
  return fields_->a.has_gradient() && fields_->A.has_jacobian() && fields_->g0.has_derivative() &&
         (trivial_omega_ || omega_.has_gradient());
}

Ten3 BundleMetric::derivative(Point x) const {
  const int d = base_dim();
  const int n = d + 1;
  if (!has_exact_derivatives()) {
    Ten3 t(n);
    std::vector<double> xx(x.begin(), x.end());
    for (int lam = 0; lam < d; ++lam) {
      double h = cfg_->fd_step_at(x[lam]);
      double save = xx[lam];
      for (int mu = 0; mu < n; ++mu)
        for (int nu = mu; nu < n; ++nu) {
          auto f = [&](double s) {
            xx[lam] = s;
            return assemble(xx)(mu, nu);
          };
          double v = fd::deriv1(f, save, h, cfg_->fd_order);
          t(lam, mu, nu) = v;
          t(lam, nu, mu) = v;
          xx[lam] = save;
        }
    }
    return t;  // fiber slot stays zero: cylinder condition
  }

  const double a = scalar_a(x);
  const double om = omega_.value(x);
  const double eps_p = cfg_->varepsilon;
  const double beta = cfg_->beta;
  Mat g0 = fields_->g0(x);
  Vec A = fields_->A(x);
  Vec da = fields_->a.gradient(x);
  Mat dA = fields_->A.jacobian(x);  // (lam, nu) -> d_lam A_nu
  Ten3 dg0 = fields_->g0.derivative(x);
  Vec dom = trivial_omega_ ? Vec(d) : omega_.gradient(x);

  const double a2 = a * a;
  const double om2 = om * om;
  Ten3 t(n);
  for (int lam = 0; lam < d; ++lam) {
    const double da2 = 2.0 * a * da[lam];                 // d_lam a^2
    const double dbase = -2.0 * eps_p * dom[lam] / (om2 * om);  // d_lam (eps' Om^-2)
    for (int mu = 0; mu < d; ++mu) {
      for (int nu = mu; nu < d; ++nu) {
        double v = dbase * g0(mu, nu) + (eps_p / om2) * dg0(lam, mu, nu) -
                   beta * beta * (da2 * A[mu] * A[nu] + a2 * dA(lam, mu) * A[nu] +
                                  a2 * A[mu] * dA(lam, nu));
        t(lam, mu, nu) = v;
        t(lam, nu, mu) = v;
      }
      double v = -beta * (da2 * A[mu] + a2 * dA(lam, mu));
      t(lam, mu, d) = v;
      t(lam, d, mu) = v;
    }
    t(lam, d, d) = -da2;
  }
  return t;
}

MetricOps BundleMetric::ops() const {
  MetricOps ops;
  ops.dim = dim();
  ops.value = [this](Point x) { return assemble(x); };
  ops.inverse = [this](Point x) { return inverse(x); };
  ops.derivative = [this](Point x) { return derivative(x); };
  return ops;
}

// ---------------------------------------------------------------------------

Ten3 MetricView::derivative(Point x) const {
  const int d = dim();
  if (fields->g0.has_derivative() && factor2.has_gradient()) {
    Mat g0 = fields->g0(x);
    Ten3 dg0 = fields->g0.derivative(x);
    double f2 = conformal_factor2(x);
    Vec df2 = factor2.gradient(x);
    Ten3 t(d);
    for (int lam = 0; lam < d; ++lam)
      for (int mu = 0; mu < d; ++mu)
        for (int nu = 0; nu < d; ++nu)
          t(lam, mu, nu) = df2[lam] * g0(mu, nu) + f2 * dg0(lam, mu, nu);
    return t;
  }
  return fd_metric_derivative(d, [this](Point p) { return value(p); }, *cfg, x);
}

MetricOps MetricView::ops() const {
  MetricOps o;
  o.dim = dim();
  o.value = [*this](Point x) { return value(x); };
  o.inverse = [*this](Point x) { return checked_inverse(value(x), "view metric inverse"); };
  o.derivative = [*this](Point x) { return derivative(x); };
  return o;
}

MetricView conformal_view(const FieldBundle& fields, const ScenarioConfig& cfg,
                          MetricView::Frame frame, double r,
                          std::optional<ScalarField> quantum_factor2) {
  MetricView v;
  v.frame = frame;
  v.fields = &fields;
  v.cfg = &cfg;
  switch (frame) {
    case MetricView::Frame::jordan:
      v.factor2 = constant_scalar(1.0);
      break;
    case MetricView::Frame::einstein: {
      const FieldBundle* fb = &fields;
      const ScenarioConfig* c = &cfg;
      v.factor2.value = [fb, c](Point x) { return fb->scalar_a(x) / c->a0; };
      if (fields.a.has_gradient())
        v.factor2.gradient = [fb, c](Point x) {
          Vec g = fb->a.gradient(x);
          g *= 1.0 / c->a0;
          return g;
        };
      break;
    }
    case MetricView::Frame::rescaled: {
      const FieldBundle* fb = &fields;
      const ScenarioConfig* c = &cfg;
      // Om_r^2 = eps + r^2 / (beta^2 a^2)
      v.factor2.value = [fb, c, r](Point x) {
        double a = fb->scalar_a(x);
        return c->epsilon + r * r / (c->beta * c->beta * a * a);
      };
      if (fields.a.has_gradient())
        v.factor2.gradient = [fb, c, r](Point x) {
          double a = fb->scalar_a(x);
          Vec g = fb->a.gradient(x);
          g *= -2.0 * r * r / (c->beta * c->beta * a * a * a);
          return g;
        };
      break;
    }
    case MetricView::Frame::quantum:
      if (!quantum_factor2)
        throw ConfigError("quantum frame requires an Om_(q,m)^2 profile");
      v.factor2 = std::move(*quantum_factor2);
      break;
  }
  return v;
}

double dalembertian(const MetricOps& ops, const std::function<double(Point)>& f, Point x) {
  const int n = ops.dim;
  Mat ginv = ops.inverse(x);
  Ten3 gamma = christoffel(ops, x);
  std::vector<double> xx(x.begin(), x.end());

  Vec df(n);
  Mat d2f(n);
  for (int mu = 0; mu < n; ++mu) {
    double h = fd::default_step2(x[mu]);
    double save = xx[mu];
    auto fm = [&](double s) {
      xx[mu] = s;
      return f(xx);
    };
    df[mu] = fd::deriv1(fm, save, h, 4);
    d2f(mu, mu) = fd::deriv2(fm, save, h);
    xx[mu] = save;
  }
  for (int mu = 0; mu < n; ++mu)
    for (int nu = mu + 1; nu < n; ++nu) {
      double hm = fd::default_step2(x[mu]);
      double hn = fd::default_step2(x[nu]);
      double smu = xx[mu], snu = xx[nu];
      auto fv = [&](double u, double v) {
        xx[mu] = u;
        xx[nu] = v;
        double r = f(xx);
        xx[mu] = smu;
        xx[nu] = snu;
        return r;
      };
      double v = (fv(smu + hm, snu + hn) - fv(smu + hm, snu - hn) - fv(smu - hm, snu + hn) +
                  fv(smu - hm, snu - hn)) /
                 (4.0 * hm * hn);
      d2f(mu, nu) = v;
      d2f(nu, mu) = v;
    }

  double box = 0;
  for (int mu = 0; mu < n; ++mu)
    for (int nu = 0; nu < n; ++nu) {
      double cov = d2f(mu, nu);
      for (int lam = 0; lam < n; ++lam) cov -= gamma(lam, mu, nu) * df[lam];
      box += ginv(mu, nu) * cov;
    }
  return box;
}

}  // namespace kk
