#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "kk/projection.hpp"

using namespace kk;
using kkt::flat_fields;
using kkt::uniform_field;
using kkt::varying_fields;

namespace {

ScenarioConfig cfg2d(int eps = 1) {
  ScenarioConfig cfg;
  cfg.base_dim = 2;
  cfg.epsilon = eps;
  return cfg;
}

}  // namespace

TEST_CASE("normalize_velocity") {
  auto cfg = cfg2d();
  cfg.base_dim = 4;
  auto f = flat_fields(4);
  BundleMetric bm(f, cfg);
  std::vector<double> x{0, 0, 0, 0};

  SUBCASE("flat timelike rescaling") {
    Vec dir{2, 0, 0, 0, 0};
    Vec v = normalize_velocity(bm, x, dir, 1.0);
    CHECK(v[0] == doctest::Approx(1.0).epsilon(1e-15));
    for (int i = 1; i < 5; ++i) CHECK(v[i] == 0.0);
  }
  SUBCASE("null target with non-null direction fails") {
    Vec dir{2, 0, 0, 0, 0};
    CHECK_THROWS_AS(normalize_velocity(bm, x, dir, 0.0), NormalizationError);
  }
  SUBCASE("wrong causal character fails") {
    Vec dir{0, 1, 0, 0, 0};  // spacelike
    CHECK_THROWS_AS(normalize_velocity(bm, x, dir, 1.0), NormalizationError);
    Vec tl{1, 0, 0, 0, 0};  // timelike
    CHECK_THROWS_AS(normalize_velocity(bm, x, tl, -1.0), NormalizationError);
  }
  SUBCASE("random timelike directions reach the target norm exactly") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int i = 0; i < 200; ++i) {
      Vec dir{2.0 + u(rng), u(rng), u(rng), u(rng), u(rng)};
      Vec v = normalize_velocity(bm, x, dir, 1.0);
      CHECK(std::abs(bm.dot(x, v, v) - 1.0) < 1e-14);
      Vec sp{u(rng), 2.0 + u(rng), u(rng), u(rng), u(rng)};
      Vec w = normalize_velocity(bm, x, sp, -1.0);
      CHECK(std::abs(bm.dot(x, w, w) + 1.0) < 1e-14);
    }
  }
}

TEST_CASE("flat bundle geodesics are straight lines") {
  auto cfg = cfg2d();
  auto f = flat_fields(2);
  BundleMetric bm(f, cfg);
  std::vector<double> x0{0, 0};
  Vec v0{1.25, 0.5, 0.5};  // g(v,v) = 1.25^2 - .25 - .25 = 1.0625... normalize
  v0 = normalize_velocity(bm, x0, v0, 1.0);
  auto traj = integrate_geodesic_5d(bm, x0, 0.0, v0, 10.0, {});
  for (const auto& s : traj.samples) {
    CHECK(std::abs(s.position[0] - v0[0] * s.parameter) < 1e-10);
    CHECK(std::abs(s.position[1] - v0[1] * s.parameter) < 1e-10);
    CHECK(std::abs(s.position[2] - v0[2] * s.parameter) < 1e-10);
    CHECK(s.norm_drift < 1e-12);
  }
}

TEST_CASE("geodesic conservation laws on the varying-scalar scenario") {
  auto cfg = cfg2d();
  auto f = varying_fields();
  BundleMetric bm(f, cfg);
  std::vector<double> x0{0, 0};
  Vec v0 = seed_geodesic_velocity(bm, x0, Vec{1, 0.1}, 0.7, 1);
  CHECK(std::abs(bm.dot(x0, v0, v0) - 1.0) < 1e-12);
  auto traj = integrate_geodesic_5d(bm, x0, 0.0, v0, 10.0, {});
  CHECK(traj.r == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(traj.max_norm_drift() < 1e-8);
  CHECK(traj.max_aux_drift() < 1e-9);  // relative r drift
  // clocks increase
  for (size_t i = 1; i < traj.samples.size(); ++i) {
    CHECK(traj.samples[i].t0 > traj.samples[i - 1].t0);
    CHECK(traj.samples[i].tr > traj.samples[i - 1].tr);
  }
}

TEST_CASE("uniform field: Lorentz trajectory matches the hyperbolic closed form") {
  const double E = 0.3, r = 0.8;
  auto cfg = cfg2d();
  auto f = uniform_field(E);
  MetricView gr = conformal_view(f, cfg, MetricView::Frame::rescaled, r);
  const double om = std::sqrt(1.0 + r * r);  // beta = a = 1

  kkt::HyperbolicOracle oracle{E, r, om, 0.25, 0.0, 0.0};
  double ut, ux;
  oracle.velocity(0.0, ut, ux);
  std::vector<double> x0{0, 0};
  Vec u0{ut, ux};
  CHECK(std::abs(gr.dot(x0, u0, u0) - 1.0) < 1e-14);

  auto traj = integrate_lorentz(gr, r, x0, u0, 10.0, {});
  CHECK(traj.max_norm_drift() < 1e-8);
  for (const auto& s : traj.samples) {
    double t, x;
    oracle.position(s.parameter, t, x);
    CHECK(std::abs(s.position[0] - t) < 1e-8);
    CHECK(std::abs(s.position[1] - x) < 1e-8);
  }
}

TEST_CASE("flat Lorentz run with F = 0 is a straight line") {
  auto cfg = cfg2d();
  auto f = flat_fields(2);
  MetricView g0 = conformal_view(f, cfg, MetricView::Frame::rescaled, 0.0);
  std::vector<double> x0{0, 0};
  Vec u0{std::cosh(0.4), std::sinh(0.4)};
  auto traj = integrate_lorentz(g0, 0.0, x0, u0, 5.0, {});
  for (const auto& s : traj.samples) {
    CHECK(std::abs(s.position[0] - u0[0] * s.parameter) < 1e-10);
    CHECK(std::abs(s.position[1] - u0[1] * s.parameter) < 1e-10);
  }
}

TEST_CASE("characteristic momenta: flat parallel transport and shell") {
  auto cfg = cfg2d();
  auto f = flat_fields(2);
  MetricView view = conformal_view(f, cfg, MetricView::Frame::jordan);
  const double m = 1.3;
  std::vector<double> x0{0, 0};
  Vec u{std::cosh(0.3), std::sinh(0.3)};
  Mat g = view.value(x0);
  Vec p0 = g.mul(u);
  p0 *= m;
  auto traj = integrate_characteristic(view, 0.0, m, x0, p0, 10.0, {});
  for (const auto& s : traj.samples) {
    CHECK(std::abs(s.velocity[0] - p0[0]) < 1e-10);  // p constant when F = 0
    CHECK(std::abs(s.velocity[1] - p0[1]) < 1e-10);
    CHECK(s.norm_drift < 1e-9);
  }
}

TEST_CASE("velocity and momentum formulations agree") {
  const double E = 0.3, m = 1.3, r = 0.8, q = r * m;
  auto cfg = cfg2d();
  auto f = uniform_field(E);
  MetricView gr = conformal_view(f, cfg, MetricView::Frame::rescaled, r);
  const double om = std::sqrt(1.0 + r * r);
  std::vector<double> x0{0, 0};
  Vec u0{std::cosh(0.25) / om, std::sinh(0.25) / om};

  auto lfe = integrate_lorentz(gr, r, x0, u0, 10.0, {});
  Mat g = gr.value(x0);
  Vec p0 = g.mul(u0);
  p0 *= m;
  auto chr = integrate_characteristic(gr, q, m, x0, p0, 10.0, {});
  CHECK(chr.max_norm_drift() < 1e-9 * m * m);  // mass-shell drift

  std::vector<double> yl(lfe.dense.dim()), yc(chr.dense.dim());
  for (int k = 0; k <= 100; ++k) {
    double s = 10.0 * k / 100;
    lfe.dense.eval(s, yl);
    chr.dense.eval(s, yc);
    CHECK(std::abs(yl[0] - yc[0]) < 1e-8);
    CHECK(std::abs(yl[1] - yc[1]) < 1e-8);
  }
}

TEST_CASE("varying scalar: the two formulations still agree") {
  const double m = 2.0, r = 0.7, q = r * m;
  auto cfg = cfg2d();
  auto f = varying_fields();
  MetricView gr = conformal_view(f, cfg, MetricView::Frame::rescaled, r);
  std::vector<double> x0{0, 0};
  Vec u0 = normalize_velocity(gr, x0, Vec{1, 0.1}, 1.0);
  auto lfe = integrate_lorentz(gr, r, x0, u0, 10.0, {});
  Mat g = gr.value(x0);
  Vec p0 = g.mul(u0);
  p0 *= m;
  auto chr = integrate_characteristic(gr, q, m, x0, p0, 10.0, {});
  std::vector<double> yl(lfe.dense.dim()), yc(chr.dense.dim());
  for (int k = 0; k <= 100; ++k) {
    double s = 10.0 * k / 100;
    lfe.dense.eval(s, yl);
    chr.dense.eval(s, yc);
    CHECK(std::abs(yl[0] - yc[0]) < 1e-8);
    CHECK(std::abs(yl[1] - yc[1]) < 1e-8);
  }
}

TEST_CASE("mass shell violation is rejected") {
  auto cfg = cfg2d();
  auto f = flat_fields(2);
  MetricView view = conformal_view(f, cfg, MetricView::Frame::jordan);
  std::vector<double> x0{0, 0};
  Vec bad{1.0, 0.7};  // p.p != m^2
  CHECK_THROWS_AS(integrate_characteristic(view, 0.0, 1.0, x0, bad, 1.0, {}),
                  NormalizationError);
}

TEST_CASE("time reversal returns to the initial state") {
  auto cfg = cfg2d();
  auto f = varying_fields();
  BundleMetric bm(f, cfg);
  std::vector<double> x0{0, 0};
  Vec v0 = seed_geodesic_velocity(bm, x0, Vec{1, 0.15}, 0.5, 1);
  IntegrationOptions opts;
  opts.abs_tol = opts.rel_tol = 1e-10;
  auto fwd = integrate_geodesic_5d(bm, x0, 0.0, v0, 5.0, opts);
  const auto& end = fwd.samples.back();
  std::vector<double> x1{end.position[0], end.position[1]};
  auto bwd = integrate_geodesic_5d(bm, x1, end.position[2], end.velocity, -5.0, opts);
  const auto& back = bwd.samples.back();
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(back.position[i] - (i < 2 ? x0[i] : 0.0)) < 1e-9);
    CHECK(std::abs(back.velocity[i] - v0[i]) < 1e-9);
  }
}

TEST_CASE("halving the tolerance never increases the final-state error") {
  auto cfg = cfg2d();
  auto f = varying_fields();
  BundleMetric bm(f, cfg);
  std::vector<double> x0{0, 0};
  Vec v0 = seed_geodesic_velocity(bm, x0, Vec{1, 0.1}, 0.7, 1);

  auto final_state = [&](double tol) {
    IntegrationOptions o;
    o.abs_tol = o.rel_tol = tol;
    o.samples = 2;
    auto tr = integrate_geodesic_5d(bm, x0, 0.0, v0, 10.0, o);
    return tr.samples.back();
  };
  auto ref = final_state(1e-13);
  double prev_err = 1e300;
  for (double tol : {1e-5, 5e-6, 2.5e-6, 1e-6, 1e-7, 1e-8, 1e-9}) {
    auto s = final_state(tol);
    double err = 0;
    for (int i = 0; i < 3; ++i) {
      err = std::max(err, std::abs(s.position[i] - ref.position[i]));
      err = std::max(err, std::abs(s.velocity[i] - ref.velocity[i]));
    }
    CHECK(err <= prev_err + 1e-12);
    prev_err = err;
  }
}

TEST_CASE("confinement boundary is a located event for eps = -1") {
  // a grows along the path; the projected tachyon must stop at a = r/beta.
  auto cfg = cfg2d(-1);
  FieldBundle f;
  f.dim = 2;
  f.a = linear_scalar(1.0, 0.3, 1);  // a = 1 + 0.3 x
  f.A = covector_from_components({constant_scalar(0.0), constant_scalar(0.0)});
  f.g0 = minkowski_metric(2);
  BundleMetric bm(f, cfg);
  const double r = 1.4;  // boundary at a = 1.4 -> x = 4/3
  std::vector<double> x0{0, 0};
  Vec v0 = seed_geodesic_velocity(bm, x0, Vec{1, 0.6}, r, -1);
  CHECK(std::abs(bm.dot(x0, v0, v0) + 1.0) < 1e-12);

  auto traj = integrate_geodesic_5d(bm, x0, 0.0, v0, 50.0, {});
  REQUIRE(traj.boundary_event);
  const auto& last = traj.samples.back();
  double a_end = f.scalar_a(std::vector<double>{last.position[0], last.position[1]});
  CHECK(a_end == doctest::Approx(r / cfg.beta).epsilon(1e-6));
  for (const auto& s : traj.samples) {
    if (s.parameter == traj.samples.back().parameter) continue;
    double a_here = f.scalar_a(std::vector<double>{s.position[0], s.position[1]});
    CHECK(a_here < r / cfg.beta);
  }
}
