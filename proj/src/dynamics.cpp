#include "kk/dynamics.hpp"

#include <cmath>

#include "kk/projection.hpp"

namespace kk {

namespace {

double norm_or_throw(double target, double n2, const char* what) {
  if (target > 0) {
    if (!(n2 > 0))
      throw NormalizationError(std::string(what) + ": direction is not timelike for the metric");
    return std::sqrt(target / n2);
  }
  if (target < 0) {
    if (!(n2 < 0))
      throw NormalizationError(std::string(what) + ": direction is not spacelike for the metric");
    return std::sqrt(target / n2);
  }
  throw NormalizationError(std::string(what) + ": cannot rescale a non-null direction to norm 0");
}

}  // namespace

Vec normalize_velocity(const BundleMetric& bm, Point x, const Vec& direction, double target) {
  double n2 = bm.dot(x, direction, direction);
  if (target == 0.0) {
    double scale = bm.assemble(x).max_abs() * direction.max_abs() * direction.max_abs();
    if (std::abs(n2) <= 1e-12 * std::max(scale, 1e-30)) return direction;
  }
  Vec v = direction;
  v *= norm_or_throw(target, n2, "normalize_velocity");
  return v;
}

Vec normalize_velocity(const MetricView& view, Point x, const Vec& direction, double target) {
  double n2 = view.dot(x, direction, direction);
  if (target == 0.0) {
    double scale = view.value(x).max_abs() * direction.max_abs() * direction.max_abs();
    if (std::abs(n2) <= 1e-12 * std::max(scale, 1e-30)) return direction;
  }
  Vec v = direction;
  v *= norm_or_throw(target, n2, "normalize_velocity");
  return v;
}

Vec seed_geodesic_velocity(const BundleMetric& bm, Point x, const Vec& base_dir, double r,
                           int eps) {
  const int d = bm.base_dim();
  const auto& cfg = bm.config();
  const double a = bm.scalar_a(x);
  const double beta = cfg.beta;
  double om2 = eps + r * r / (beta * beta * a * a);
  double u2 = bm.fields().g0(x).quad(base_dir, base_dir);
  if (!(om2 > 0) || !(u2 > 0))
    throw NormalizationError("seed_geodesic_velocity: base direction must be g0-timelike and "
                             "eps + r^2/(beta a)^2 must be positive");
  double lam = std::sqrt(om2 / u2);
  Vec A = bm.fields().A(x);
  double Au = 0;
  for (int mu = 0; mu < d; ++mu) Au += A[mu] * base_dir[mu];
  Vec v(d + 1);
  for (int mu = 0; mu < d; ++mu) v[mu] = lam * base_dir[mu];
  v[d] = -r / (beta * a * a) - beta * lam * Au;
  return v;
}

// ---------------------------------------------------------------------------

Trajectory integrate_geodesic_5d(const BundleMetric& bm, Point x0, double fiber0, const Vec& v0,
                                 double span, const IntegrationOptions& opts) {
  const int d = bm.base_dim();
  const int n = d + 1;
  const auto& cfg = bm.config();
  const int eps = cfg.epsilon;
  const double beta = cfg.beta;

  bm.fields().check_signature(x0);
  {
    double n2 = bm.dot(x0, v0, v0);
    if (std::abs(n2 - eps) > 1e-9)
      throw NormalizationError("integrate_geodesic_5d: v0 is not normalized to g(v,v) = eps");
  }

  std::vector<double> z0(x0.begin(), x0.end());
  z0.push_back(fiber0);
  Vec zfull = Vec::from(z0);
  const double r0 = extract_charge_ratio(bm, zfull.span(), v0);

  MetricOps ops = bm.ops();

  auto rhs = [&, d, n](double, std::span<const double> y, std::span<double> dy) {
    Point base(y.data(), d);
    Ten3 gamma = christoffel(ops, base);
    for (int A = 0; A < n; ++A) dy[A] = y[n + A];
    for (int A = 0; A < n; ++A) {
      double acc = 0;
      for (int B = 0; B < n; ++B)
        for (int C = 0; C < n; ++C) acc += gamma(A, B, C) * y[n + B] * y[n + C];
      dy[n + A] = -acc;
    }
    // clocks: t0 from the Jordan line element, tr from Om_r^2
    Mat g0 = bm.fields().g0(base);
    double q0 = 0;
    for (int mu = 0; mu < d; ++mu)
      for (int nu = 0; nu < d; ++nu) q0 += g0(mu, nu) * y[n + mu] * y[n + nu];
    dy[2 * n] = std::sqrt(std::abs(q0));
    double a = bm.scalar_a(base);
    dy[2 * n + 1] = eps + r0 * r0 / (beta * beta * a * a);
  };

  std::vector<double> y0(2 * n + 2, 0.0);
  for (int i = 0; i < d; ++i) y0[i] = x0[i];
  y0[d] = fiber0;
  for (int i = 0; i < n; ++i) y0[n + i] = v0[i];

  ode::Options oopts;
  oopts.abs_tol = opts.abs_tol;
  oopts.rel_tol = opts.rel_tol;
  oopts.max_steps = opts.max_steps;

  ode::EventFn boundary;
  const ode::EventFn* event = nullptr;
  if (eps == -1) {
    boundary = [&, d](double, std::span<const double> y) {
      Point base(y.data(), d);
      double a = bm.scalar_a(base);
      return -1.0 + r0 * r0 / (beta * beta * a * a);  // Om_r^2, positive inside
    };
    event = &boundary;
  }

  ode::Solution sol = ode::integrate(rhs, y0, 0.0, span, oopts, event);

  Trajectory traj;
  traj.kind = Trajectory::Kind::geodesic5d;
  traj.epsilon = eps;
  traj.r = r0;
  traj.base_dim = d;
  traj.boundary_event = sol.has_event;
  traj.event_parameter = sol.has_event ? sol.event_time : 0.0;
  double t_end = sol.has_event ? sol.event_time : sol.t_end();
  traj.dense = std::move(sol);

  const int ns = std::max(2, opts.samples);
  std::vector<double> ybuf(y0.size());
  for (int k = 0; k < ns; ++k) {
    double t = t_end * k / (ns - 1);
    traj.dense.eval(t, ybuf);
    TrajectorySample s;
    s.parameter = t;
    s.t = t;
    s.position = Vec(n);
    s.velocity = Vec(n);
    for (int i = 0; i < n; ++i) s.position[i] = ybuf[i];
    for (int i = 0; i < n; ++i) s.velocity[i] = ybuf[n + i];
    s.t0 = ybuf[2 * n];
    s.tr = ybuf[2 * n + 1];
    Point base(ybuf.data(), d);
    s.norm_drift = std::abs(bm.dot(base, s.velocity, s.velocity) - eps);
    double rk = extract_charge_ratio(bm, s.position.span(), s.velocity);
    s.aux_drift = r0 != 0.0 ? std::abs(rk - r0) / std::abs(r0) : std::abs(rk - r0);
    traj.samples.push_back(std::move(s));
  }
  bm.fields().check_signature(Point(ybuf.data(), d));
  return traj;
}

Trajectory integrate_lorentz(const MetricView& view, double r, Point x0, const Vec& u0,
                             double span, const IntegrationOptions& opts) {
  const int d = view.dim();
  const auto& cfg = *view.cfg;
  {
    double n2 = view.dot(x0, u0, u0);
    double scale = view.value(x0).max_abs() * std::max(1.0, u0.max_abs() * u0.max_abs());
    if (std::abs(n2 - 1.0) > 1e-10 * std::max(1.0, scale))
      throw NormalizationError("integrate_lorentz: u0 is not unit in the view metric");
  }

  MetricOps ops = view.ops();

  auto rhs = [&, d](double, std::span<const double> y, std::span<double> dy) {
    Point x(y.data(), d);
    Ten3 gamma = christoffel(ops, x);
    Mat ginv = ops.inverse(x);
    Mat F = field_strength(*view.fields, x, cfg);
    for (int mu = 0; mu < d; ++mu) dy[mu] = y[d + mu];
    for (int mu = 0; mu < d; ++mu) {
      double acc = 0;
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) acc += gamma(mu, a, b) * y[d + a] * y[d + b];
      double force = 0;
      for (int a = 0; a < d; ++a)
        for (int nu = 0; nu < d; ++nu) force += ginv(mu, a) * F(a, nu) * y[d + nu];
      dy[d + mu] = -acc + r * force;
    }
    Mat g0 = view.fields->g0(x);
    double q0 = 0;
    for (int mu = 0; mu < d; ++mu)
      for (int nu = 0; nu < d; ++nu) q0 += g0(mu, nu) * y[d + mu] * y[d + nu];
    dy[2 * d] = std::sqrt(std::abs(q0));
  };

  std::vector<double> y0(2 * d + 1, 0.0);
  for (int i = 0; i < d; ++i) y0[i] = x0[i];
  for (int i = 0; i < d; ++i) y0[d + i] = u0[i];

  ode::Options oopts;
  oopts.abs_tol = opts.abs_tol;
  oopts.rel_tol = opts.rel_tol;
  oopts.max_steps = opts.max_steps;

  ode::Solution sol = ode::integrate(rhs, y0, 0.0, span, oopts);

  Trajectory traj;
  traj.kind = Trajectory::Kind::lorentz;
  traj.epsilon = cfg.epsilon;
  traj.r = r;
  traj.base_dim = d;
  double t_end = sol.t_end();
  traj.dense = std::move(sol);

  const int ns = std::max(2, opts.samples);
  std::vector<double> ybuf(y0.size());
  for (int k = 0; k < ns; ++k) {
    double tr = t_end * k / (ns - 1);
    traj.dense.eval(tr, ybuf);
    TrajectorySample s;
    s.parameter = tr;
    s.t = std::numeric_limits<double>::quiet_NaN();
    s.tr = tr;
    s.t0 = ybuf[2 * d];
    s.position = Vec(d);
    s.velocity = Vec(d);
    for (int i = 0; i < d; ++i) s.position[i] = ybuf[i];
    for (int i = 0; i < d; ++i) s.velocity[i] = ybuf[d + i];
    Point x(ybuf.data(), d);
    s.norm_drift = std::abs(view.dot(x, s.velocity, s.velocity) - 1.0);
    s.aux_drift = 0.0;
    traj.samples.push_back(std::move(s));
  }
  return traj;
}

Trajectory integrate_characteristic(const MetricView& view, double q, double m, Point x0,
                                    const Vec& p0_cov, double span,
                                    const IntegrationOptions& opts) {
  const int d = view.dim();
  const auto& cfg = *view.cfg;
  if (!(m > 0)) throw ConfigError("integrate_characteristic requires m > 0");
  const int eps = cfg.epsilon;
  const double shell = eps * m * m;

  MetricOps ops = view.ops();

  {
    Mat gi = ops.inverse(x0);
    double pp = gi.quad(p0_cov, p0_cov);
    if (std::abs(pp - shell) > 1e-10 * std::max(1.0, m * m))
      throw NormalizationError("integrate_characteristic: p0 violates the mass shell");
  }

  auto rhs = [&, d](double, std::span<const double> y, std::span<double> dy) {
    Point x(y.data(), d);
    Mat gi = ops.inverse(x);
    Ten3 gamma = christoffel(ops, x);
    Mat F = field_strength(*view.fields, x, cfg);
    Vec p(d);
    for (int i = 0; i < d; ++i) p[i] = y[d + i];
    Vec pup = gi.mul(p);
    for (int mu = 0; mu < d; ++mu) dy[mu] = pup[mu] / m;
    for (int a = 0; a < d; ++a) {
      double acc = 0;
      for (int l = 0; l < d; ++l)
        for (int b = 0; b < d; ++b) acc += gamma(l, a, b) * p[l] * pup[b];
      double force = 0;
      for (int b = 0; b < d; ++b) force += F(a, b) * pup[b];
      dy[d + a] = (acc + q * force) / m;
    }
    Mat g0 = view.fields->g0(x);
    double q0 = 0;
    for (int mu = 0; mu < d; ++mu)
      for (int nu = 0; nu < d; ++nu) q0 += g0(mu, nu) * (pup[mu] / m) * (pup[nu] / m);
    dy[2 * d] = std::sqrt(std::abs(q0));
  };

  std::vector<double> y0(2 * d + 1, 0.0);
  for (int i = 0; i < d; ++i) y0[i] = x0[i];
  for (int i = 0; i < d; ++i) y0[d + i] = p0_cov[i];

  ode::Options oopts;
  oopts.abs_tol = opts.abs_tol;
  oopts.rel_tol = opts.rel_tol;
  oopts.max_steps = opts.max_steps;

  ode::Solution sol = ode::integrate(rhs, y0, 0.0, span, oopts);

  Trajectory traj;
  traj.kind = Trajectory::Kind::characteristic;
  traj.epsilon = eps;
  traj.r = m != 0 ? q / m : 0.0;
  traj.base_dim = d;
  double t_end = sol.t_end();
  traj.dense = std::move(sol);

  const int ns = std::max(2, opts.samples);
  std::vector<double> ybuf(y0.size());
  for (int k = 0; k < ns; ++k) {
    double s_par = t_end * k / (ns - 1);
    traj.dense.eval(s_par, ybuf);
    TrajectorySample s;
    s.parameter = s_par;
    s.t = std::numeric_limits<double>::quiet_NaN();
    s.tr = s_par;
    s.t0 = ybuf[2 * d];
    s.position = Vec(d);
    s.velocity = Vec(d);  // covariant momentum, not a velocity, for this kind
    for (int i = 0; i < d; ++i) s.position[i] = ybuf[i];
    for (int i = 0; i < d; ++i) s.velocity[i] = ybuf[d + i];
    Point x(ybuf.data(), d);
    Mat gi = ops.inverse(x);
    double pp = gi.quad(s.velocity, s.velocity);
    s.norm_drift = std::abs(pp - shell);
    s.aux_drift = std::abs(pp - shell) / std::max(m * m, 1e-300);
    traj.samples.push_back(std::move(s));
  }
  return traj;
}

}  // namespace kk
