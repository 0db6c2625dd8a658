#ifndef KK_GEOMETRY_HPP
#define KK_GEOMETRY_HPP

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>

#include "kk/fields.hpp"
#include "kk/linalg.hpp"

namespace kk {

struct SingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FrameError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Point evaluators for one metric: value, inverse and first derivative.
// The derivative tensor is (lambda, mu, nu) -> d_lambda g_{mu nu}.
struct MetricOps {
  int dim = 0;
  std::function<Mat(Point)> value;
  std::function<Mat(Point)> inverse;
  std::function<Ten3(Point)> derivative;
};

// Christoffel symbols of the second kind from point evaluators:
//   G^lam_{mu nu} = 1/2 g^{lam rho} (d_mu g_{rho nu} + d_nu g_{rho mu} - d_rho g_{mu nu})
Ten3 christoffel(const MetricOps& ops, Point x);

// Generic finite-difference MetricOps wrapper around a bare value evaluator.
// Used for metrics without registered analytic derivatives.
MetricOps fd_metric_ops(int dim, std::function<Mat(Point)> value, const ScenarioConfig& cfg);

// F_{mu nu} = d_mu A_nu - d_nu A_mu, antisymmetric by construction.
Mat field_strength(const FieldBundle& fields, Point x, const ScenarioConfig& cfg);

// ---------------------------------------------------------------------------
// Bundle metric  gt = eps' * Om^-2 * g0 - a^2 (dy + beta A)^2  on P = M x fiber.
// Frame vectors: k = d_y, e_mu = d_mu - beta A_mu d_y; identities
//   gt(k,k) = -a^2,  gt(k,e_mu) = 0,  gt(e_mu,e_nu) = eps' Om^-2 g0_{mu nu}.
// The fiber slot is the last index. All evaluators are y-independent.
class BundleMetric {
public:
  BundleMetric(const FieldBundle& fields, const ScenarioConfig& cfg)
      : fields_(&fields), cfg_(&cfg), omega_(constant_scalar(1.0)), trivial_omega_(true) {}

  // Override the conformal profile Om (positive; sign lives in cfg.varepsilon).
  void set_conformal_profile(ScalarField omega) {
    omega_ = std::move(omega);
    trivial_omega_ = false;
  }

  int base_dim() const { return fields_->dim; }
  int dim() const { return fields_->dim + 1; }
  const FieldBundle& fields() const { return *fields_; }
  const ScenarioConfig& config() const { return *cfg_; }

  double scalar_a(Point x) const { return fields_->scalar_a(x); }
  double omega(Point x) const { return omega_.value(x); }

  // (d+1)x(d+1) matrix at base point x (independent of fiber coordinate).
  Mat assemble(Point x) const;

  // Analytic block inverse:
  //   gt^-1 = eps' Om^2 g0^{mu nu} e_mu x e_nu - a^-2 d_y x d_y
  Mat inverse(Point x) const;

  // d_lambda gt_{AB}; lambda runs over base coordinates, the fiber slot is 0
  // by the cylinder condition. Exact chain rule when the underlying fields
  // carry exact derivatives, centered FD of assemble() otherwise.
  Ten3 derivative(Point x) const;

  bool has_exact_derivatives() const;

  // g(v,w) for (d+1)-vectors at base point x.
  double dot(Point x, const Vec& v, const Vec& w) const { return assemble(x).quad(v, w); }

  MetricOps ops() const;

private:
  const FieldBundle* fields_;
  const ScenarioConfig* cfg_;
  ScalarField omega_;
  bool trivial_omega_;
};

// ---------------------------------------------------------------------------
// Conformal views of the base metric: g_view = factor2(x) * g0(x).
struct MetricView {
  enum class Frame { jordan, einstein, rescaled, quantum };

  Frame frame = Frame::jordan;
  const FieldBundle* fields = nullptr;
  const ScenarioConfig* cfg = nullptr;
  ScalarField factor2;  // conformal factor squared

  int dim() const { return fields->dim; }

  double conformal_factor2(Point x) const {
    double f2 = factor2.value(x);
    if (frame != Frame::jordan && !(f2 > 0))
      throw FrameError("conformal factor squared is non-positive at a queried point");
    return f2;
  }

  Mat value(Point x) const {
    Mat g = fields->g0(x);
    g *= conformal_factor2(x);
    return g;
  }

  double dot(Point x, const Vec& v, const Vec& w) const { return value(x).quad(v, w); }

  Ten3 derivative(Point x) const;
  MetricOps ops() const;
};

// Frame selection. `r` is required for Frame::rescaled; `quantum_factor2`
// supplies Om_(q,m)^2 for Frame::quantum.
MetricView conformal_view(const FieldBundle& fields, const ScenarioConfig& cfg,
                          MetricView::Frame frame, double r = 0.0,
                          std::optional<ScalarField> quantum_factor2 = std::nullopt);

// Scalar d'Alembertian Box f = g^{mu nu} (d_mu d_nu f - G^lam_{mu nu} d_lam f)
// with FD second derivatives of f. Test utility.
double dalembertian(const MetricOps& ops, const std::function<double(Point)>& f, Point x);

}  // namespace kk

#endif
