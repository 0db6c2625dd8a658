#include "kk/ode.hpp"

#include <algorithm>
#include <cmath>

namespace kk::ode {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

struct Work {
  int n;
  std::vector<double> k1, k2, k3, k4, k5, k6, k7, tmp, y1, err;
  explicit Work(int n_)
      : n(n_), k1(n_), k2(n_), k3(n_), k4(n_), k5(n_), k6(n_), k7(n_), tmp(n_), y1(n_), err(n_) {}
};

// One DP5 step from (t,y) with derivative f already in k1. Fills y1, k7
// (=f(y1), FSAL) and err. Returns scaled error norm.
double dp5_step(const Rhs& rhs, double t, std::span<const double> y, double h, Work& w,
                const Options& opts, bool want_err) {
  const int n = w.n;
  auto& [nn, k1, k2, k3, k4, k5, k6, k7, tmp, y1, err] = w;
  (void)nn;

  for (int i = 0; i < n; ++i) tmp[i] = y[i] + h * a21 * k1[i];
  rhs(t + c2 * h, tmp, k2);
  for (int i = 0; i < n; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
  rhs(t + c3 * h, tmp, k3);
  for (int i = 0; i < n; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
  rhs(t + c4 * h, tmp, k4);
  for (int i = 0; i < n; ++i)
    tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
  rhs(t + c5 * h, tmp, k5);
  for (int i = 0; i < n; ++i)
    tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
  rhs(t + h, tmp, k6);
  for (int i = 0; i < n; ++i)
    y1[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
  rhs(t + h, y1, k7);

  if (!want_err) return 0.0;
  double norm2 = 0;
  for (int i = 0; i < n; ++i) {
    err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    double sc = opts.abs_tol + opts.rel_tol * std::max(std::abs(y[i]), std::abs(y1[i]));
    double q = err[i] / sc;
    norm2 += q * q;
  }
  return std::sqrt(norm2 / n);
}

// Quintic Hermite coefficients for one component; theta in [0,1].
inline double hermite5(double y0, double d0, double ym, double dm, double y1, double d1,
                       double th) {
  const double A = ym - y0 - 0.5 * d0;
  const double B = dm - d0;
  const double C = y1 - y0 - d0;
  const double D = d1 - d0;
  const double cc2 = 16 * A - 8 * B + 7 * C - D;
  const double cc3 = -32 * A + 32 * B - 34 * C + 5 * D;
  const double cc4 = 16 * A - 40 * B + 52 * C - 8 * D;
  const double cc5 = 16 * B - 24 * C + 4 * D;
  return y0 + th * (d0 + th * (cc2 + th * (cc3 + th * (cc4 + th * cc5))));
}

}  // namespace

const Step& Solution::locate(double t) const {
  const bool fwd = steps.front().h > 0;
  auto cmp = [fwd](const Step& s, double tt) {
    return fwd ? (s.t0 + s.h < tt) : (s.t0 + s.h > tt);
  };
  auto it = std::lower_bound(steps.begin(), steps.end(), t, cmp);
  if (it == steps.end()) --it;
  return *it;
}

void Solution::eval(double t, std::span<double> out) const {
  const Step& s = locate(t);
  double th = (t - s.t0) / s.h;
  th = std::clamp(th, 0.0, 1.0);
  const int n = static_cast<int>(s.y0.size());
  for (int i = 0; i < n; ++i)
    out[i] = hermite5(s.y0[i], s.h * s.f0[i], s.ym[i], s.h * s.fm[i], s.y1[i], s.h * s.f1[i], th);
}

Solution integrate(const Rhs& rhs, std::span<const double> y0, double t0, double t1,
                   const Options& opts, const EventFn* event) {
  const int n = static_cast<int>(y0.size());
  const double dir = (t1 >= t0) ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  Solution sol;
  if (span == 0.0) return sol;

  Work w(n);
  Work whalf(n);
  std::vector<double> y(y0.begin(), y0.end());
  double t = t0;
  rhs(t, y, w.k1);

  double h_max = opts.h_max > 0 ? opts.h_max : span;
  double h = opts.h_init > 0 ? opts.h_init : std::min(span / 100.0, h_max);
  const double h_floor = std::max(span * 1e-14, 1e-300);

  double ev_prev = 0.0;
  bool ev_active = event != nullptr;
  if (ev_active) ev_prev = (*event)(t, y);

  for (long step = 0; step < opts.max_steps; ++step) {
    if (dir * (t + dir * h - t1) > 0) h = std::abs(t1 - t);
    if (h < h_floor) {
      sol.status = Status::step_underflow;
      throw IntegrationError("step size underflow at t = " + std::to_string(t), std::move(sol));
    }

    double errn = dp5_step(rhs, t, y, dir * h, w, opts, true);
    if (errn <= 1.0) {
      // midpoint by a half step (for the quintic dense output)
      whalf.k1 = w.k1;
      dp5_step(rhs, t, y, dir * h * 0.5, whalf, opts, false);

      Step s;
      s.t0 = t;
      s.h = dir * h;
      s.y0 = y;
      s.f0 = w.k1;
      s.ym = whalf.y1;
      s.fm = whalf.k7;
      s.y1 = w.y1;
      s.f1 = w.k7;
      sol.steps.push_back(std::move(s));

      t += dir * h;
      y = w.y1;
      w.k1 = w.k7;  // FSAL

      if (ev_active) {
        double ev_now = (*event)(t, y);
        if ((ev_prev < 0 && ev_now >= 0) || (ev_prev > 0 && ev_now <= 0)) {
          // bisect on dense output
          const Step& last = sol.steps.back();
          double lo = last.t0, hi = t;
          std::vector<double> ytmp(n);
          double flo = ev_prev;
          for (int it = 0; it < 200 && std::abs(hi - lo) > 1e-15 * (1.0 + std::abs(hi)); ++it) {
            double mid = 0.5 * (lo + hi);
            sol.eval(mid, ytmp);
            double fmid = (*event)(mid, ytmp);
            if ((flo < 0 && fmid < 0) || (flo > 0 && fmid > 0)) {
              lo = mid;
              flo = fmid;
            } else
              hi = mid;
          }
          sol.has_event = true;
          sol.event_time = 0.5 * (lo + hi);
          sol.status = Status::event;
          return sol;
        }
        ev_prev = ev_now;
      }

      if (std::abs(t - t1) <= 1e-14 * (std::abs(t1) + 1.0) || dir * (t - t1) >= 0) {
        sol.status = Status::complete;
        return sol;
      }
      double fac = errn > 1e-30 ? 0.9 * std::pow(errn, -0.2) : 5.0;
      h = std::min(h * std::clamp(fac, 0.2, 5.0), h_max);
    } else {
      double fac = 0.9 * std::pow(errn, -0.2);
      h *= std::clamp(fac, 0.1, 0.9);
    }
  }
  sol.status = Status::max_steps;
  throw IntegrationError("maximum step count exceeded", std::move(sol));
}

}  // namespace kk::ode
