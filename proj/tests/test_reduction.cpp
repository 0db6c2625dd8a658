#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "helpers.hpp"
#include "kk/reduction.hpp"

using namespace kk;

namespace {

ScenarioConfig red_cfg(double hbar = 1.0, int d = 4) {
  ScenarioConfig cfg;
  cfg.base_dim = d;  // weights carry the full spacetime dimension
  cfg.hbar = hbar;
  return cfg;
}

// flat g0, a(x) = 1 + 0.2 sin x, A_x = 0.1 cos x; periodic on [0, 2 pi)
FieldBundle reduction_fields(int d = 4, double amp = 0.2) {
  FieldBundle f;
  f.dim = d;
  f.a = sinusoidal_scalar(1.0, amp, 1.0, 1);
  std::vector<ScalarField> A(d);
  for (int i = 0; i < d; ++i) A[i] = constant_scalar(0.0);
  A[1].value = [](Point x) { return 0.1 * std::cos(x[1]); };
  A[1].gradient = nullptr;
  f.A = covector_from_components(std::move(A));
  f.g0 = minkowski_metric(d);
  return f;
}

FieldBundle const_fields(double a_val, double A_x, int d = 4) {
  FieldBundle f;
  f.dim = d;
  f.a = constant_scalar(a_val);
  std::vector<ScalarField> A(d);
  for (int i = 0; i < d; ++i) A[i] = constant_scalar(0.0);
  A[1] = constant_scalar(A_x);
  f.A = covector_from_components(std::move(A));
  f.g0 = minkowski_metric(d);
  return f;
}

}  // namespace

TEST_CASE("fourier decomposition") {
  const int nx = 4, ny = 8;
  SUBCASE("single harmonic lands in one mode slot") {
    Slice s(nx * ny);
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j) {
        double y = 2 * M_PI * j / ny;
        s[i * ny + j] = std::exp(Cplx(0, y));  // e^{iy}
      }
    auto modes = fourier_decompose(s, nx, ny);
    for (int k = 0; k < ny; ++k)
      for (int i = 0; i < nx; ++i) {
        double expect = (mode_number(k, ny) == 1) ? 1.0 : 0.0;
        CHECK(std::abs(modes[k][i] - expect) < 1e-14);
      }
  }
  SUBCASE("real even data has conjugate-symmetric coefficients") {
    Slice s(nx * ny);
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j) {
        double y = 2 * M_PI * j / ny;
        s[i * ny + j] = 0.3 + std::cos(y) + 0.2 * std::cos(2 * y) + 0.1 * i;
      }
    auto modes = fourier_decompose(s, nx, ny);
    for (int n = 1; n < ny / 2; ++n) {
      int kp = n, km = ny - n;  // slots of +n and -n
      for (int i = 0; i < nx; ++i)
        CHECK(std::abs(modes[kp][i] - std::conj(modes[km][i])) < 1e-13);
    }
  }
  SUBCASE("Parseval identity and round trip on random data") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    Slice s(nx * ny);
    for (auto& v : s) v = Cplx(u(rng), u(rng));
    auto modes = fourier_decompose(s, nx, ny);
    double lhs = 0, rhs = 0;
    for (const auto& v : s) lhs += std::norm(v);
    lhs /= ny;
    for (const auto& m : modes)
      for (const auto& v : m) rhs += std::norm(v);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    Slice back = fourier_reconstruct(modes, nx, ny);
    double diff = 0;
    for (size_t i = 0; i < s.size(); ++i) diff = std::max(diff, std::abs(back[i] - s[i]));
    CHECK(diff < 1e-12);
  }
}

TEST_CASE("alpha profile: constant-a algebraic fixed points") {
  SUBCASE("a = a0, m = 1, q = 0 gives alpha = 1") {
    auto cfg = red_cfg(0.0);
    auto f = const_fields(1.0, 0.0);
    auto prof = solve_alpha(f, cfg, 0.0, 1.0, 32, 0.0, 2 * M_PI);
    for (double a : prof.alpha) CHECK(a == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(prof.iterations == 0);  // seed is already the Newton fixed point
  }
  SUBCASE("a = a0, m = 1, q = 1 gives alpha = sqrt(2)") {
    auto cfg = red_cfg(0.0);
    auto f = const_fields(1.0, 0.0);
    auto prof = solve_alpha(f, cfg, 1.0, 1.0, 32, 0.0, 2 * M_PI);
    for (double a : prof.alpha) CHECK(a == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  }
  SUBCASE("general constant a with 10% perturbed seed converges in <= 8 iterations") {
    auto cfg = red_cfg(0.5);
    cfg.a0 = 1.0;
    auto f = const_fields(1.7, 0.0);
    const double m = 1.3, q = 0.9;
    double expect =
        m * std::sqrt((cfg.a0 / 1.7) * (1.0 + q * q / (m * m * 1.7 * 1.7)));
    std::vector<double> guess(48, 1.1 * expect);
    auto prof = solve_alpha(f, cfg, q, m, 48, 0.0, 2 * M_PI, 0.0, &guess);
    CHECK(prof.iterations <= 8);
    for (double a : prof.alpha) CHECK(a == doctest::Approx(expect).epsilon(1e-12));
    // hbar terms vanish for constant profiles: same fixed point for hbar > 0
  }
  SUBCASE("sign-indefinite vacuum branch raises a domain error") {
    auto cfg = red_cfg(0.0);
    cfg.epsilon = -1;  // eps m^2 + q^2/(beta a)^2 < 0 for small q
    auto f = const_fields(1.0, 0.0);
    CHECK_THROWS_AS(solve_alpha(f, cfg, 0.1, 1.0, 32, 0.0, 2 * M_PI), DomainError);
  }
}

TEST_CASE("alpha profile: classical limit order in hbar") {
  // Om_(q,m) -> Om_(q/m) at order hbar^2; the profile's conformal factor is
  // compared, |Om_(q,m)| = (alpha/m) sqrt(a/a0).
  auto f = reduction_fields();
  const double q = 1.0, m = 1.0;
  const int nx = 2048;
  std::vector<double> errs;
  for (double hb : {0.1, 0.05, 0.025}) {
    auto cfg = red_cfg(hb);
    auto prof = solve_alpha(f, cfg, q, m, nx, 0.0, 2 * M_PI);
    double err = 0;
    for (int i = 0; i < nx; ++i) {
      std::vector<double> p(4, 0.0);
      p[1] = prof.x_min + prof.hx * i;
      double a = f.scalar_a(p);
      double om_r = std::sqrt(1.0 + q * q / (m * m * a * a));
      double om_prof = std::sqrt(std::abs(prof.omega2(i, f, cfg)));
      err = std::max(err, std::abs(om_prof - om_r));
    }
    errs.push_back(err);
  }
  double order1 = std::log2(errs[0] / errs[1]);
  double order2 = std::log2(errs[1] / errs[2]);
  CHECK(order1 > 1.8);
  CHECK(order1 < 2.2);
  CHECK(order2 > 1.8);
  CHECK(order2 < 2.2);
}

TEST_CASE("omega equation residual") {
  SUBCASE("constant-a fixed point solves the Om equation to round-off") {
    auto cfg = red_cfg(0.7);
    auto f = const_fields(1.4, 0.0);
    auto prof = solve_alpha(f, cfg, 0.8, 1.1, 32, 0.0, 2 * M_PI);
    CHECK(omega_qm_residual(prof, f, cfg) < 1e-12);
  }
  SUBCASE("varying-a converged profile: change of variables agrees") {
    auto cfg = red_cfg(0.5);
    auto f = reduction_fields();
    const double tol = 1e-4;
    auto prof = solve_alpha(f, cfg, 1.0, 1.0, 256, 0.0, 2 * M_PI, tol);
    double res = omega_qm_residual(prof, f, cfg);
    CHECK(res < 10 * tol);
  }
}

TEST_CASE("conformal d'Alembertian identity on random smooth functions") {
  // Box f = |Om^-2 a/a0| (Box_E f + g_E^{mu nu} d_mu ln|Om^2/a| d_nu f)
  // checked with FD on both sides; g = Om^2 g0, g_E = (a/a0) g0, d = 4.
  auto cfg = red_cfg(1.0);
  auto fb = reduction_fields();
  auto om2 = [](Point x) { return 1.3 + 0.25 * std::sin(x[1] + 0.4) + 0.1 * std::cos(x[0]); };

  auto g_ops = fd_metric_ops(4,
                             [&](Point x) {
                               Mat g = fb.g0(x);
                               g *= om2(x);
                               return g;
                             },
                             cfg);
  auto gE_ops = fd_metric_ops(4,
                              [&](Point x) {
                                Mat g = fb.g0(x);
                                g *= fb.scalar_a(x) / cfg.a0;
                                return g;
                              },
                              cfg);

  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 5; ++trial) {
    double c1 = u(rng), c2 = u(rng);
    auto fn = [c1, c2](Point x) {
      return std::sin(c1 * x[0] + 0.3) * std::cos(c2 * x[1]) + 0.2 * x[1] * x[1];
    };
    std::vector<double> x{u(rng), u(rng), 0.0, 0.0};

    double lhs = dalembertian(g_ops, fn, x);

    double boxE = dalembertian(gE_ops, fn, x);
    // gradient coupling term, FD first derivatives
    double dot = 0;
    Mat gEinv = gE_ops.inverse(x);
    std::vector<double> xx = x;
    auto uln = [&](Point p) { return std::log(std::abs(om2(p) / fb.scalar_a(p))); };
    for (int mu = 0; mu < 2; ++mu) {  // fields depend on t,x only
      double h = fd::default_step2(x[mu]);
      double save = xx[mu];
      auto f_mu = [&](double s) {
        xx[mu] = s;
        return uln(xx);
      };
      auto g_mu = [&](double s) {
        xx[mu] = s;
        return fn(xx);
      };
      double du = fd::deriv1(f_mu, save, h, 4);
      for (int nu = 0; nu < 2; ++nu) {
        double hn = fd::default_step2(x[nu]);
        double saven = xx[nu];
        xx[mu] = save;
        auto g_nu = [&](double s) {
          xx[nu] = s;
          return fn(xx);
        };
        double df = fd::deriv1(g_nu, saven, hn, 4);
        xx[nu] = saven;
        dot += gEinv(mu, nu) * du * df;
        (void)g_mu;
      }
    }
    double a = fb.scalar_a(x);
    double rhs = std::abs(a / (om2(x) * cfg.a0)) * (boxE + dot);
    CHECK(lhs == doctest::Approx(rhs).epsilon(2e-4));
  }
}

TEST_CASE("bundle evolution: flat dispersion with O(h^2) phase error") {
  auto cfg = red_cfg(1.0);
  auto f = const_fields(1.0, 0.0);
  const double m = 1.0, k = 1.0;
  const double om = std::sqrt(k * k + m * m);  // n = 0 mode

  auto exact = [&](double t, double x, double y) {
    (void)y;
    return std::exp(Cplx(0, k * x - om * t));
  };
  auto err_at = [&](int nx) {
    LatticeSpec lat;
    lat.nx = nx;
    lat.ny = 4;
    lat.t_final = 1.0;
    lat.cfl = 0.25;
    auto grid = evolve_kg_bundle(
        f, cfg, lat, m, [&](double x, double y) { return exact(0, x, y); },
        [&](double x, double y) { return Cplx(0, -om) * exact(0, x, y); });
    double T = grid.ht * grid.nt();
    double worst = 0;
    const auto& s = grid.slices.back();
    for (int i = 0; i < grid.nx; ++i)
      for (int j = 0; j < grid.ny; ++j)
        worst = std::max(worst, std::abs(s[grid.idx(i, j)] - exact(T, grid.x_of(i), 0)));
    return worst;
  };
  double e1 = err_at(32), e2 = err_at(64);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("bundle evolution: Klein shift of the effective mass") {
  // constant a != a0: mode n feels mass^2 = eps m^2 + q^2/(beta^2 a^2)
  auto cfg = red_cfg(1.0);
  const double aval = 2.0;
  auto f = const_fields(aval, 0.0);
  const double m = 1.0, k = 1.0;
  const int n = 1;
  const double q = n * cfg.hbar * cfg.beta;
  const double meff2 = m * m + q * q / (cfg.beta * cfg.beta * aval * aval);
  const double om = std::sqrt(k * k + meff2 / (cfg.hbar * cfg.hbar));

  auto exact = [&](double t, double x, double y) {
    return std::exp(Cplx(0, k * x + n * y - om * t));
  };
  auto err_at = [&](int nx) {
    LatticeSpec lat;
    lat.nx = nx;
    lat.ny = 8;
    lat.t_final = 1.0;
    lat.cfl = 0.25;
    auto grid = evolve_kg_bundle(
        f, cfg, lat, m, [&](double x, double y) { return exact(0, x, y); },
        [&](double x, double y) { return Cplx(0, -om) * exact(0, x, y); });
    double T = grid.ht * grid.nt();
    double worst = 0;
    const auto& s = grid.slices.back();
    for (int i = 0; i < grid.nx; ++i)
      for (int j = 0; j < grid.ny; ++j)
        worst = std::max(worst,
                         std::abs(s[grid.idx(i, j)] - exact(T, grid.x_of(i), grid.y_of(j))));
    return worst;
  };
  double e1 = err_at(32), e2 = err_at(64);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("bundle evolution never mixes fiber modes") {
  auto cfg = red_cfg(1.0);
  auto f = reduction_fields();
  LatticeSpec lat;
  lat.nx = 32;
  lat.ny = 8;
  lat.t_final = 0.5;
  auto grid = evolve_kg_bundle(
      f, cfg, lat, 1.0,
      [](double x, double y) { return std::exp(Cplx(0, x + y)); },  // single n = 1
      [](double x, double y) { return Cplx(0, -1.5) * std::exp(Cplx(0, x + y)); });
  auto modes = fourier_decompose(grid.slices.back(), grid.nx, grid.ny);
  double keep = 0, leak = 0;
  for (int kslot = 0; kslot < grid.ny; ++kslot) {
    double norm = 0;
    for (const auto& v : modes[kslot]) norm += std::norm(v);
    if (mode_number(kslot, grid.ny) == 1)
      keep = norm;
    else
      leak = std::max(leak, norm);
  }
  CHECK(keep > 0.1);
  CHECK(leak < 1e-24 * keep);
}

TEST_CASE("CFL violation is rejected before stepping") {
  auto cfg = red_cfg(1.0);
  auto f = const_fields(1.0, 0.0);
  LatticeSpec lat;
  lat.nx = 32;
  lat.ny = 4;
  lat.ht_override = 1.0;  // far above the bound for hx ~ 0.2
  CHECK_THROWS_AS(evolve_kg_bundle(
                      f, cfg, lat, 1.0, [](double, double) { return Cplx(1, 0); },
                      [](double, double) { return Cplx(0, 0); }),
                  ConfigError);
}

TEST_CASE("mode KG residual") {
  SUBCASE("zero mode data gives zero residual") {
    auto cfg = red_cfg(1.0);
    auto f = const_fields(2.0, 0.3);
    auto prof = solve_alpha(f, cfg, 1.0, 1.0, 32, 0.0, 2 * M_PI);
    ModeHistory mh;
    mh.n = 1;
    mh.q = 1.0;
    mh.hx = prof.hx;
    mh.ht = 0.01;
    mh.x_min = 0.0;
    mh.values.assign(5, std::vector<Cplx>(32, Cplx(0, 0)));
    auto res = mode_kg_residual(mh, prof, f, cfg, 1.0);
    CHECK(res.residual == 0.0);
  }
  SUBCASE("constant-a exact plane wave: residual O(h^2), quarters when h halves") {
    auto cfg = red_cfg(1.0);
    const double aval = 2.0, Axc = 0.3, m = 1.0, k = 1.0;
    auto f = const_fields(aval, Axc);
    const int n = 1;
    const double q = n * cfg.hbar * cfg.beta;
    const double om2_metric = (m * m + q * q / (aval * aval)) / (m * m);
    const double om =
        std::sqrt(((cfg.hbar * k - q * Axc) * (cfg.hbar * k - q * Axc) + m * m * om2_metric) /
                  (cfg.hbar * cfg.hbar));

    auto residual_at = [&](int nx) {
      auto prof = solve_alpha(f, cfg, q, m, nx, 0.0, 2 * M_PI);
      ModeHistory mh;
      mh.n = n;
      mh.q = q;
      mh.hx = prof.hx;
      mh.ht = 0.5 * prof.hx;
      mh.x_min = 0.0;
      const int nt = 8;
      for (int lev = 0; lev <= nt; ++lev) {
        std::vector<Cplx> row(nx);
        for (int i = 0; i < nx; ++i) {
          double x = prof.hx * i, t = mh.ht * lev;
          row[i] = prof.alpha[i] * std::exp(Cplx(0, k * x - om * t));
        }
        mh.values.push_back(std::move(row));
      }
      return mode_kg_residual(mh, prof, f, cfg, m).residual;
    };
    double e1 = residual_at(64), e2 = residual_at(128);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
  }
}

TEST_CASE("evolved bundle modes satisfy the base KG equation at second order") {
  // The reduction chain: evolve, decompose, rescale by alpha, measure the
  // gauge-covariant KG residual in g_(q,m). Doubling the resolution must
  // quarter the residual for every carried mode.
  auto cfg = red_cfg(0.6);  // all carried modes sit on the classical branch
  auto f = reduction_fields();
  const double m = 1.0;
  std::vector<int> modes{0, 1, 2};
  std::vector<double> ks{1, 2, 1}, amps{1.0, 0.8, 0.5};

  auto psi0 = [&](double x, double y) {
    Cplx v = 0;
    for (size_t j = 0; j < modes.size(); ++j)
      v += amps[j] * std::exp(Cplx(0, ks[j] * x + modes[j] * y));
    return v;
  };
  auto dtpsi0 = [&](double x, double y) {
    Cplx v = 0;
    for (size_t j = 0; j < modes.size(); ++j) {
      double q = modes[j] * cfg.hbar * cfg.beta;
      double om = std::sqrt(ks[j] * ks[j] + (m * m + q * q) / (cfg.hbar * cfg.hbar));
      v += amps[j] * Cplx(0, -om) * std::exp(Cplx(0, ks[j] * x + modes[j] * y));
    }
    return v;
  };

  auto residuals_at = [&](int nx) {
    LatticeSpec lat;
    lat.nx = nx;
    lat.ny = 8;
    lat.t_final = 0.6;
    lat.cfl = 0.25;
    auto grid = evolve_kg_bundle(f, cfg, lat, m, psi0, dtpsi0);
    std::vector<double> out;
    for (int n : modes) {
      auto mh = extract_mode(grid, cfg, n);
      auto prof = solve_alpha(f, cfg, mh.q, m, nx, lat.x_min, lat.x_max);
      out.push_back(mode_kg_residual(mh, prof, f, cfg, m).residual);
    }
    return out;
  };
  auto r1 = residuals_at(48), r2 = residuals_at(96);
  for (size_t j = 0; j < modes.size(); ++j) {
    CHECK(r1[j] / r2[j] > 3.0);
    CHECK(r1[j] / r2[j] < 5.0);
  }
}
