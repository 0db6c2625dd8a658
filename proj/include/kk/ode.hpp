#ifndef KK_ODE_HPP
#define KK_ODE_HPP

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Adaptive Dormand-Prince 5(4) integrator. Each accepted step also computes
// a half-step midpoint so the stored dense output is a quintic Hermite
// interpolant (locally O(h^6)), good enough to resample trajectories and
// locate events without degrading the integration error.

namespace kk::ode {

using Rhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

// Scalar event function; a sign change across a step triggers root location.
using EventFn = std::function<double(double t, std::span<const double> y)>;

struct Options {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double h_init = 0.0;   // 0 = auto
  double h_max = 0.0;    // 0 = |span|
  long max_steps = 2'000'000;
};

enum class Status { complete, event, step_underflow, max_steps };

struct Step {
  double t0, h;  // h signed
  std::vector<double> y0, f0, ym, fm, y1, f1;
};

class Solution {
public:
  std::vector<Step> steps;
  Status status = Status::complete;
  double event_time = 0.0;
  bool has_event = false;

  double t_begin() const { return steps.empty() ? 0.0 : steps.front().t0; }
  double t_end() const {
    return steps.empty() ? 0.0 : steps.back().t0 + steps.back().h;
  }
  int dim() const { return steps.empty() ? 0 : static_cast<int>(steps.front().y0.size()); }

  // Dense evaluation; t clamped to the covered span.
  void eval(double t, std::span<double> out) const;
  std::vector<double> eval(double t) const {
    std::vector<double> out(dim());
    eval(t, out);
    return out;
  }

private:
  const Step& locate(double t) const;
};

struct IntegrationError : std::runtime_error {
  Solution partial;
  IntegrationError(const std::string& msg, Solution p)
      : std::runtime_error(msg), partial(std::move(p)) {}
};

// Integrate from t0 to t1 (either direction). If `event` is given, stop at
// its first sign change and record the bisected root in the solution.
Solution integrate(const Rhs& rhs, std::span<const double> y0, double t0, double t1,
                   const Options& opts = {}, const EventFn* event = nullptr);

}  // namespace kk::ode

#endif
