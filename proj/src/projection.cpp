#include "kk/projection.hpp"

#include <cmath>

namespace kk {

double extract_charge_ratio(const BundleMetric& bm, Point z, const Vec& zdot) {
  const int d = bm.base_dim();
  Point base(z.data(), d);
  const double a = bm.scalar_a(base);
  const double beta = bm.config().beta;
  Vec A = bm.fields().A(base);
  double Ax = 0;
  for (int mu = 0; mu < d; ++mu) Ax += A[mu] * zdot[mu];
  return -beta * a * a * (zdot[d] + beta * Ax);
}

double omega_r(const ScenarioConfig& cfg, double r, double a_value, int eps) {
  double arg = eps + r * r / (cfg.beta * cfg.beta * a_value * a_value);
  if (!(arg > 0))
    throw OutsideDomainError("Om_r^2 = eps + r^2/(beta a)^2 is non-positive: outside the "
                             "confinement region");
  return std::sqrt(arg);
}

double proper_time_ratio(const ScenarioConfig& cfg, double r, double a_value) {
  if (cfg.epsilon != 1)
    throw ConfigError("proper_time_ratio is stated for timelike bundle geodesics (eps = 1)");
  double x = r / (cfg.beta * a_value);
  return std::sqrt(1.0 + x * x);
}

ProjectionResult project_and_reparametrize(const Trajectory& geo, const BundleMetric& bm,
                                           int samples, double tr_max) {
  if (geo.kind != Trajectory::Kind::geodesic5d)
    throw ComparisonError("project_and_reparametrize expects a bundle geodesic");
  const int d = bm.base_dim();
  const int n = d + 1;
  const auto& cfg = bm.config();
  const double r = geo.r;
  const int eps = geo.epsilon;

  const double t_end =
      geo.boundary_event ? geo.event_parameter : geo.dense.t_end();

  std::vector<double> ybuf(geo.dense.dim());
  auto tr_at = [&](double t) {
    geo.dense.eval(t, ybuf);
    return ybuf[2 * n + 1];
  };
  double tr_total = tr_at(t_end);
  if (tr_max > 0) {
    if (tr_max > tr_total)
      throw ComparisonError("requested t_r span exceeds the integrated geodesic");
    tr_total = tr_max;
  }

  ProjectionResult pr;
  pr.r = r;
  pr.epsilon = eps;
  pr.confined_truncated = geo.boundary_event;
  pr.event_parameter = geo.event_parameter;
  if (eps == 0)
    pr.scale_note = "eps = 0: t_r inherits the affine scale of the null geodesic; "
                    "rescaling t -> c t maps t_r -> c t_r";

  const int ns = samples > 0 ? samples : static_cast<int>(geo.samples.size());
  pr.samples.reserve(ns);

  for (int k = 0; k < ns; ++k) {
    double target = tr_total * k / (ns - 1);
    // invert the monotone clock t_r(t) by bisection on the dense output
    double lo = 0.0, hi = t_end;
    for (int it = 0; it < 100 && (hi - lo) > 1e-15 * (1.0 + t_end); ++it) {
      double mid = 0.5 * (lo + hi);
      (tr_at(mid) < target ? lo : hi) = mid;
    }
    double t = 0.5 * (lo + hi);
    if (k == 0) t = 0.0;
    if (k == ns - 1 && tr_max <= 0) t = t_end;

    geo.dense.eval(t, ybuf);
    ProjectedSample s;
    s.tr = target;
    s.t = t;
    s.t0 = ybuf[2 * n];
    s.x = Vec(d);
    for (int i = 0; i < d; ++i) s.x[i] = ybuf[i];
    Point base(ybuf.data(), d);
    s.a = bm.scalar_a(base);
    s.omega_r = omega_r(cfg, r, s.a, eps);
    const double om2 = s.omega_r * s.omega_r;
    s.dxdtr = Vec(d);
    for (int i = 0; i < d; ++i) s.dxdtr[i] = ybuf[n + i] / om2;
    Mat g0 = bm.fields().g0(base);
    s.gr_norm_defect = std::abs(om2 * g0.quad(s.dxdtr, s.dxdtr) - 1.0);
    pr.max_gr_norm_defect = std::max(pr.max_gr_norm_defect, s.gr_norm_defect);
    pr.samples.push_back(std::move(s));
  }
  return pr;
}

DeviationReport compare_with_lorentz(const ProjectionResult& pr, const FieldBundle& fields,
                                     const ScenarioConfig& cfg, const IntegrationOptions& opts,
                                     double perturb_u0) {
  if (pr.samples.size() < 2) throw ComparisonError("projection result has no span to compare");
  const int d = fields.dim;
  MetricView gr = conformal_view(fields, cfg, MetricView::Frame::rescaled, pr.r);

  Vec x0 = pr.samples.front().x;
  Vec u0 = pr.samples.front().dxdtr;
  if (perturb_u0 != 0.0) {
    u0[d > 1 ? 1 : 0] += perturb_u0;
    u0 = normalize_velocity(gr, x0.span(), u0, 1.0);
  } else {
    // remove the integration-scale norm defect so the precondition holds exactly
    u0 = normalize_velocity(gr, x0.span(), u0, 1.0);
  }

  const double span = pr.tr_end();
  Trajectory lfe = integrate_lorentz(gr, pr.r, x0.span(), u0, span, opts);
  const double covered = lfe.dense.t_end();
  if (std::abs(covered - span) > 1e-9 * (1.0 + std::abs(span)))
    throw ComparisonError("comparison span mismatch between projection and Lorentz run");

  DeviationReport rep;
  rep.rows.reserve(pr.samples.size());
  std::vector<double> ybuf(lfe.dense.dim());
  for (const auto& s : pr.samples) {
    lfe.dense.eval(s.tr, ybuf);
    DeviationRow row;
    row.tr = s.tr;
    for (int i = 0; i < d; ++i) {
      row.position_dev = std::max(row.position_dev, std::abs(ybuf[i] - s.x[i]));
      row.velocity_dev = std::max(row.velocity_dev, std::abs(ybuf[d + i] - s.dxdtr[i]));
    }
    row.clock_dev = std::abs(ybuf[2 * d] - s.t0);
    rep.max_position_dev = std::max(rep.max_position_dev, row.position_dev);
    rep.max_velocity_dev = std::max(rep.max_velocity_dev, row.velocity_dev);
    rep.max_clock_dev = std::max(rep.max_clock_dev, row.clock_dev);
    rep.rows.push_back(row);
  }
  return rep;
}

double phase_clock(const Trajectory& traj, const MetricView& view, double q, double m,
                   const ScalarField* gauge_chi, int quadrature_points) {
  if (traj.kind != Trajectory::Kind::characteristic)
    throw ComparisonError("phase_clock expects a characteristic (momentum-form) trajectory");
  const int d = view.dim();
  const auto& cfg = *view.cfg;
  const double s_end = traj.dense.t_end();

  int np = quadrature_points;
  if (np < 3) np = 3;
  if (np % 2 == 0) ++np;  // Simpson needs an even interval count
  const double h = s_end / (np - 1);

  std::vector<double> ybuf(traj.dense.dim());
  MetricOps ops = view.ops();
  double sum_dS = 0, sum_A = 0;
  for (int k = 0; k < np; ++k) {
    double s = h * k;
    traj.dense.eval(s, ybuf);
    Point x(ybuf.data(), d);
    Vec p(d);
    for (int i = 0; i < d; ++i) p[i] = ybuf[d + i];
    Mat gi = ops.inverse(x);
    Vec xdot = gi.mul(p);
    xdot *= 1.0 / m;

    Vec Atot = view.fields->A(x);
    if (gauge_chi) {
      Vec dchi = gauge_chi->grad(x, cfg);
      Atot += dchi;
    }
    double a_dot = 0, p_dot = 0;
    for (int i = 0; i < d; ++i) {
      a_dot += Atot[i] * xdot[i];
      p_dot += (p[i] + q * Atot[i]) * xdot[i];  // P = p + q A_total
    }
    const double w = (k == 0 || k == np - 1) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    sum_dS += w * p_dot;
    sum_A += w * q * a_dot;
  }
  return (sum_dS - sum_A) * h / 3.0;
}

}  // namespace kk
