#ifndef KK_DYNAMICS_HPP
#define KK_DYNAMICS_HPP

#include <vector>

#include "kk/geometry.hpp"
#include "kk/ode.hpp"

namespace kk {

struct NormalizationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParticleSpec {
  double m = 1.0;
  double q = 0.0;
  int epsilon = 1;  // causal type of the bundle curve: -1, 0, 1
  double r() const { return q / m; }
};

struct TrajectorySample {
  double parameter = 0;
  Vec position;  // d (base) or d+1 (bundle) coordinates
  Vec velocity;
  double t = 0, t0 = 0, tr = 0;  // affine, Jordan and r-proper clocks
  double norm_drift = 0;         // |g(v,v) - target|
  double aux_drift = 0;          // charge-ratio drift or mass-shell drift
};

struct Trajectory {
  enum class Kind { geodesic5d, lorentz, characteristic };
  Kind kind = Kind::geodesic5d;
  int epsilon = 1;
  double r = 0.0;  // conserved charge-to-mass ratio at the initial point
  int base_dim = 2;

  std::vector<TrajectorySample> samples;
  ode::Solution dense;

  bool boundary_event = false;   // confinement boundary reached (epsilon = -1)
  double event_parameter = 0.0;

  double parameter_begin() const { return samples.front().parameter; }
  double parameter_end() const { return samples.back().parameter; }

  double max_norm_drift() const {
    double m = 0;
    for (const auto& s : samples) m = std::max(m, s.norm_drift);
    return m;
  }
  double max_aux_drift() const {
    double m = 0;
    for (const auto& s : samples) m = std::max(m, s.aux_drift);
    return m;
  }
};

struct IntegrationOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int samples = 201;  // uniform output samples over the integrated span
  long max_steps = 2'000'000;
};

// Rescale `direction` to the requested causal norm. target > 0 and < 0
// rescale exactly; target == 0 only accepts already-null directions.
Vec normalize_velocity(const BundleMetric& bm, Point x, const Vec& direction, double target);
Vec normalize_velocity(const MetricView& view, Point x, const Vec& direction, double target);

// Initial (d+1)-velocity of a bundle geodesic with charge ratio r, causal
// type eps and base direction `base_dir` (g0-timelike for eps >= 0).
Vec seed_geodesic_velocity(const BundleMetric& bm, Point x, const Vec& base_dir, double r,
                           int eps);

// Affinely parametrized geodesic of the bundle metric. State carries the
// Jordan clock t_0 = int sqrt(g0(xdot,xdot)) dt and the r-clock
// t_r = int [eps + r^2/(beta^2 a^2)] dt. For eps = -1 the confinement
// boundary a -> r/beta is a located event: the trajectory is truncated
// there and flagged, not an error.
Trajectory integrate_geodesic_5d(const BundleMetric& bm, Point x0, double fiber0, const Vec& v0,
                                 double span, const IntegrationOptions& opts = {});

// Lorentz force equation in the view metric, parametrized by its proper
// time:  nabla_u u = r Fhat(u),  g_view(u,u) = 1.
Trajectory integrate_lorentz(const MetricView& view, double r, Point x0, const Vec& u0,
                             double span, const IntegrationOptions& opts = {});

// Momentum-form characteristics of the short-wave limit:
//   dx/ds = p^mu / m,   m dp_a/ds = G^l_{ab} p_l p^b + q F_{ab} p^b,
// with the mass shell p.p = eps m^2 monitored.
Trajectory integrate_characteristic(const MetricView& view, double q, double m, Point x0,
                                    const Vec& p0_cov, double span,
                                    const IntegrationOptions& opts = {});

}  // namespace kk

#endif
