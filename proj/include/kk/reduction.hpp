#ifndef KK_REDUCTION_HPP
#define KK_REDUCTION_HPP

#include <complex>
#include <functional>
#include <vector>

#include "kk/geometry.hpp"

// Lattice Klein-Gordon solver on the bundle and its fiber-mode reduction.
// The base lattice extends in (t, x) with periodic x; fields may not depend
// on the remaining base coordinates, whose contribution enters through the
// cfg.base_dim powers in the volume weights. The fiber is periodic with
// period 2*pi and is handled spectrally by the discrete Fourier transform.

namespace kk {

using Cplx = std::complex<double>;
using Slice = std::vector<Cplx>;  // nx * ny values, index i*ny + j

struct NonconvergenceError : std::runtime_error {
  std::vector<double> residual_history;
  NonconvergenceError(const std::string& msg, std::vector<double> hist)
      : std::runtime_error(msg), residual_history(std::move(hist)) {}
};

struct LatticeSpec {
  int nx = 64;
  int ny = 8;
  double x_min = 0.0;
  double x_max = 6.28318530717958647692;  // 2*pi
  double t_final = 1.0;
  double cfl = 0.4;
  double ht_override = 0.0;  // 0 = automatic from the stability bound
};

struct ModeGrid {
  int nx = 0, ny = 0;
  double hx = 0, hy = 0, ht = 0;
  double x_min = 0;
  std::vector<Slice> slices;  // time levels 0..nt

  int nt() const { return static_cast<int>(slices.size()) - 1; }
  double x_of(int i) const { return x_min + hx * i; }
  double y_of(int j) const { return hy * j; }
  size_t idx(int i, int j) const { return static_cast<size_t>(i) * ny + j; }
};

// Signed mode number of DFT slot k (0..ny-1): 0,1,...,ny/2-1,-ny/2,...,-1.
int mode_number(int slot, int ny);

// Forward DFT along the fiber: mode[slot][i] = (1/ny) sum_j S[i,j] e^{-i n y_j}.
std::vector<Slice> fourier_decompose(const Slice& s, int nx, int ny);

// Inverse transform; exact round trip with fourier_decompose up to round-off.
Slice fourier_reconstruct(const std::vector<Slice>& modes, int nx, int ny);

// One fiber mode of the whole evolution, as a (t,x) history. Mode n carries
// charge q = n * hbar * beta.
struct ModeHistory {
  int n = 0;
  double q = 0;
  double hx = 0, ht = 0, x_min = 0;
  std::vector<std::vector<Cplx>> values;  // [time level][x index]
};

ModeHistory extract_mode(const ModeGrid& grid, const ScenarioConfig& cfg, int n);

// Leapfrog evolution of  hbar^2 Box_gt Psi + eps m^2 Psi = 0  on the bundle
// lattice: divergence form with sqrt|det gt| weights in x, exact (per-mode)
// derivatives along the periodic fiber. Requires hbar > 0, varepsilon = +1,
// A_t = 0 and diagonal g0 at the lattice points (the time row of the
// inverse bundle metric must be diagonal for an explicit scheme).
ModeGrid evolve_kg_bundle(const FieldBundle& fields, const ScenarioConfig& cfg,
                          const LatticeSpec& lat, double m,
                          const std::function<Cplx(double, double)>& psi0,
                          const std::function<Cplx(double, double)>& dtpsi0);

// Static profile alpha(x) solving
//   hbar^2 Box_E alpha + eps' (a0/a) [eps m^2 + q^2/(beta^2 a^2)] alpha - alpha^3 = 0
// on the periodic x lattice, by damped Newton seeded from the algebraic
// hbar = 0 branch (continuation in hbar when needed).
struct AlphaProfile {
  double q = 0, m = 1, hbar = 0;
  int nx = 0;
  double hx = 0, x_min = 0;
  std::vector<double> alpha;
  std::vector<double> residual_history;  // Newton ||F||_inf per iteration
  int iterations = 0;
  double residual = 0;

  // Om_(q,m)^2 = eps' alpha^2 a / (m^2 a0), signed by eps'.
  double omega2(int i, const FieldBundle& fields, const ScenarioConfig& cfg) const;
};

AlphaProfile solve_alpha(const FieldBundle& fields, const ScenarioConfig& cfg, double q, double m,
                         int nx, double x_min, double x_max, double tol = 0.0,
                         const std::vector<double>* initial_guess = nullptr, int max_iter = 60);

// RMS residual of the Om_(q,m) equation evaluated directly in the variables
// of the coupling metric g = Om^2 g0 (change-of-variables consistency check;
// exact algebraic equivalence holds for base_dim = 4).
double omega_qm_residual(const AlphaProfile& profile, const FieldBundle& fields,
                         const ScenarioConfig& cfg);

// RMS residual of the gauge-covariant base Klein-Gordon operator
//   D^(q,m) mu D^(q,m)_mu psi + m^2 psi,   psi = psibar / alpha,
// in the metric g_(q,m) = Om_(q,m)^2 g0, over interior time levels.
struct ModeResidual {
  int n = 0;
  double q = 0;
  double l2_norm = 0;   // RMS of psibar over the interior lattice
  double residual = 0;  // RMS of the KG operator applied to psi
};

ModeResidual mode_kg_residual(const ModeHistory& mode, const AlphaProfile& profile,
                              const FieldBundle& fields, const ScenarioConfig& cfg, double m);

}  // namespace kk

#endif
