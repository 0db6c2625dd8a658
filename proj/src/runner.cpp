#include "kk/runner.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "kk/csvio.hpp"
#include "kk/projection.hpp"

namespace kk {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// splitmix64: seed -> per-mode phases for randomized initial data
double seeded_phase(unsigned seed, int k) {
  uint64_t z = (static_cast<uint64_t>(seed) << 16) + static_cast<uint64_t>(k) + 1;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  z = z ^ (z >> 31);
  return 6.28318530717958647692 * (static_cast<double>(z >> 11) / 9007199254740992.0);
}

struct PerParticle {
  ScenarioConfig cfg;  // scenario config with the particle's epsilon
  double r = 0;
};

PerParticle particle_cfg(const Scenario& sc, const Scenario::Particle& p) {
  PerParticle pp;
  pp.cfg = sc.cfg;
  pp.cfg.epsilon = p.epsilon;
  pp.r = p.m != 0 ? p.q / p.m : 0.0;
  return pp;
}

IntegrationOptions int_opts(const Scenario& sc) {
  IntegrationOptions o;
  o.abs_tol = sc.cfg.abs_tol;
  o.rel_tol = sc.cfg.rel_tol;
  o.samples = sc.run.samples;
  return o;
}

void cmd_geodesic(const Scenario& sc, const std::string& dir, RunResult& res,
                  std::ostringstream& sum) {
  const std::string comment = csv_comment(sc.config_hash(), sc.cfg.abs_tol, sc.cfg.rel_tol);
  for (size_t i = 0; i < sc.particles.size(); ++i) {
    const auto& p = sc.particles[i];
    PerParticle pp = particle_cfg(sc, p);
    BundleMetric bm(sc.fields, pp.cfg);
    Vec v0 = seed_geodesic_velocity(bm, p.x0, Vec::from(p.dir), pp.r, p.epsilon);
    Trajectory traj = integrate_geodesic_5d(bm, p.x0, p.fiber0, v0, sc.run.span, int_opts(sc));
    std::string path = dir + "/geodesic_" + std::to_string(i) + ".csv";
    write_trajectory_csv(traj, path, comment);
    res.artifacts.push_back(path);
    sum << " p" << i << ": norm_drift=" << fmt(traj.max_norm_drift())
        << " r_drift=" << fmt(traj.max_aux_drift())
        << (traj.boundary_event ? " boundary_event" : "");
  }
}

void cmd_project(const Scenario& sc, const std::string& dir, RunResult& res,
                 std::ostringstream& sum) {
  const std::string comment = csv_comment(sc.config_hash(), sc.cfg.abs_tol, sc.cfg.rel_tol);
  for (size_t i = 0; i < sc.particles.size(); ++i) {
    const auto& p = sc.particles[i];
    PerParticle pp = particle_cfg(sc, p);
    BundleMetric bm(sc.fields, pp.cfg);
    Vec v0 = seed_geodesic_velocity(bm, p.x0, Vec::from(p.dir), pp.r, p.epsilon);
    Trajectory traj = integrate_geodesic_5d(bm, p.x0, p.fiber0, v0, sc.run.span, int_opts(sc));
    ProjectionResult pr = project_and_reparametrize(traj, bm);
    std::string path = dir + "/clock_table_" + std::to_string(i) + ".csv";
    write_clock_table_csv(pr, path, comment);
    res.artifacts.push_back(path);
    sum << " p" << i << ": t_r_span=" << fmt(pr.tr_end())
        << " gr_norm_defect=" << fmt(pr.max_gr_norm_defect)
        << (pr.confined_truncated ? " truncated" : "");
    if (!pr.scale_note.empty()) sum << " [" << pr.scale_note << "]";
  }
}

void cmd_compare(const Scenario& sc, const std::string& dir, RunResult& res,
                 std::ostringstream& sum) {
  const std::string comment = csv_comment(sc.config_hash(), sc.cfg.abs_tol, sc.cfg.rel_tol);
  double worst = 0;
  for (size_t i = 0; i < sc.particles.size(); ++i) {
    const auto& p = sc.particles[i];
    PerParticle pp = particle_cfg(sc, p);
    BundleMetric bm(sc.fields, pp.cfg);
    Vec v0 = seed_geodesic_velocity(bm, p.x0, Vec::from(p.dir), pp.r, p.epsilon);
    Trajectory traj = integrate_geodesic_5d(bm, p.x0, p.fiber0, v0, sc.run.span, int_opts(sc));
    ProjectionResult pr = project_and_reparametrize(traj, bm);
    DeviationReport rep =
        compare_with_lorentz(pr, sc.fields, pp.cfg, int_opts(sc), sc.run.perturb_u0);
    std::string path = dir + "/deviation_" + std::to_string(i) + ".csv";
    write_deviation_csv(rep, path, comment);
    res.artifacts.push_back(path);
    worst = std::max(worst, rep.max_position_dev);
    sum << " p" << i << ": max_dev=" << fmt(rep.max_position_dev)
        << " vel_dev=" << fmt(rep.max_velocity_dev) << " clock_dev=" << fmt(rep.max_clock_dev);
  }
  sum << " threshold=" << fmt(sc.run.compare_threshold);
  if (worst > sc.run.compare_threshold) res.exit_code = kThresholdFail;
}

void cmd_characteristic(const Scenario& sc, const std::string& dir, RunResult& res,
                        std::ostringstream& sum) {
  const std::string comment = csv_comment(sc.config_hash(), sc.cfg.abs_tol, sc.cfg.rel_tol);
  for (size_t i = 0; i < sc.particles.size(); ++i) {
    const auto& p = sc.particles[i];
    if (!(p.m > 0)) throw ConfigError("characteristic runs need m > 0");
    PerParticle pp = particle_cfg(sc, p);
    MetricView gr = conformal_view(sc.fields, pp.cfg, MetricView::Frame::rescaled, pp.r);
    Vec u0 = normalize_velocity(gr, p.x0, Vec::from(p.dir), 1.0);
    Mat g = gr.value(p.x0);
    Vec p0 = g.mul(u0);
    p0 *= p.m;
    Trajectory traj =
        integrate_characteristic(gr, p.q, p.m, p.x0, p0, sc.run.span, int_opts(sc));
    std::string path = dir + "/characteristic_" + std::to_string(i) + ".csv";
    write_trajectory_csv(traj, path, comment);
    res.artifacts.push_back(path);
    double phase = phase_clock(traj, gr, p.q, p.m);
    double expected = p.epsilon * p.m * traj.dense.t_end();
    sum << " p" << i << ": shell_drift=" << fmt(traj.max_norm_drift())
        << " phase_defect=" << fmt(std::abs(phase - expected));
  }
}

void cmd_alpha(const Scenario& sc, const std::string& dir, RunResult& res,
               std::ostringstream& sum) {
  const std::string comment = csv_comment(sc.config_hash(), sc.cfg.abs_tol, sc.cfg.rel_tol);
  for (size_t i = 0; i < sc.particles.size(); ++i) {
    const auto& p = sc.particles[i];
    PerParticle pp = particle_cfg(sc, p);
    AlphaProfile prof = solve_alpha(sc.fields, pp.cfg, p.q, p.m, sc.lattice.nx,
                                    sc.lattice.x_min, sc.lattice.x_max);
    CsvWriter w(comment, {"x", "alpha", "omega2"});
    for (int k = 0; k < prof.nx; ++k)
      w.add_row({prof.x_min + prof.hx * k, prof.alpha[k], prof.omega2(k, sc.fields, pp.cfg)});
    std::string path = dir + "/alpha_" + std::to_string(i) + ".csv";
    w.write(path);
    res.artifacts.push_back(path);
    double odres = omega_qm_residual(prof, sc.fields, pp.cfg);
    sum << " p" << i << ": newton_iters=" << prof.iterations
        << " residual=" << fmt(prof.residual) << " omega_eq_residual=" << fmt(odres);
  }
}

void cmd_reduce(const Scenario& sc, const std::string& dir, RunResult& res,
                std::ostringstream& sum, unsigned seed) {
  const std::string comment = csv_comment(sc.config_hash(), sc.cfg.abs_tol, sc.cfg.rel_tol);
  if (sc.modes.size() != sc.ic_k.size() || sc.modes.size() != sc.ic_amp.size())
    throw ConfigError("lattice.modes, ic_k and ic_amp must have matching lengths");
  if (!(sc.cfg.hbar > 0)) throw ConfigError("reduce runs need constants.hbar > 0");

  // mean scalar for the approximate initial frequency
  double abar = 0;
  {
    const int probes = 64;
    for (int i = 0; i < probes; ++i) {
      std::vector<double> pt(sc.cfg.base_dim, 0.0);
      pt[1] = sc.lattice.x_min + (sc.lattice.x_max - sc.lattice.x_min) * i / probes;
      abar += sc.fields.scalar_a(pt);
    }
    abar /= probes;
  }

  struct ModeIc {
    int n;
    double k, amp, omega, phase;
  };
  std::vector<ModeIc> ics;
  for (size_t j = 0; j < sc.modes.size(); ++j) {
    ModeIc ic;
    ic.n = sc.modes[j];
    ic.k = sc.ic_k[j];
    ic.amp = sc.ic_amp[j];
    double meff2 = sc.cfg.epsilon * sc.mass * sc.mass +
                   ic.n * ic.n * sc.cfg.hbar * sc.cfg.hbar / (abar * abar);
    ic.omega = std::sqrt(std::max(0.0, ic.k * ic.k + meff2 / (sc.cfg.hbar * sc.cfg.hbar)));
    ic.phase = seed ? seeded_phase(seed, static_cast<int>(j)) : 0.0;
    ics.push_back(ic);
  }
  auto psi0 = [&](double x, double y) {
    Cplx v = 0;
    for (const auto& ic : ics)
      v += ic.amp * std::exp(Cplx(0, ic.k * x + ic.n * y + ic.phase));
    return v;
  };
  auto dtpsi0 = [&](double x, double y) {
    Cplx v = 0;
    for (const auto& ic : ics)
      v += ic.amp * Cplx(0, -ic.omega) * std::exp(Cplx(0, ic.k * x + ic.n * y + ic.phase));
    return v;
  };

  const int levels = std::max(1, sc.levels);
  CsvWriter conv(comment, {"level", "nx", "hx", "n", "q", "mode_norm", "residual"});
  std::vector<std::vector<double>> residuals(levels);

  for (int lev = 0; lev < levels; ++lev) {
    LatticeSpec lat = sc.lattice;
    lat.nx = sc.lattice.nx << lev;
    ModeGrid grid = evolve_kg_bundle(sc.fields, sc.cfg, lat, sc.mass, psi0, dtpsi0);
    CsvWriter spec_w(comment, {"n", "q", "mode_norm", "residual"});
    for (int n : sc.modes) {
      ModeHistory mh = extract_mode(grid, sc.cfg, n);
      AlphaProfile prof =
          solve_alpha(sc.fields, sc.cfg, mh.q, sc.mass, lat.nx, lat.x_min, lat.x_max);
      ModeResidual mr = mode_kg_residual(mh, prof, sc.fields, sc.cfg, sc.mass);
      spec_w.add_row({static_cast<double>(mr.n), mr.q, mr.l2_norm, mr.residual});
      conv.add_row({static_cast<double>(lev), static_cast<double>(lat.nx), grid.hx,
                    static_cast<double>(mr.n), mr.q, mr.l2_norm, mr.residual});
      residuals[lev].push_back(mr.residual);
    }
    std::string path = dir + "/mode_spectrum_level" + std::to_string(lev) + ".csv";
    spec_w.write(path);
    res.artifacts.push_back(path);
  }
  if (levels > 1) {
    std::string path = dir + "/residual_vs_h.csv";
    conv.write(path);
    res.artifacts.push_back(path);
    for (size_t j = 0; j < sc.modes.size(); ++j) {
      sum << " n=" << sc.modes[j] << ":";
      for (int lev = 0; lev + 1 < levels; ++lev)
        sum << " ratio=" << fmt(residuals[lev][j] / residuals[lev + 1][j]);
    }
  } else {
    for (size_t j = 0; j < sc.modes.size(); ++j)
      sum << " n=" << sc.modes[j] << ": residual=" << fmt(residuals[0][j]);
  }
}

}  // namespace

std::string resolve_out_dir(const Scenario& sc, const std::string& out_dir_override) {
  if (!out_dir_override.empty()) return out_dir_override;
  if (!sc.out_dir.empty()) return sc.out_dir;
  if (const char* env = std::getenv("KK_OUT_DIR"); env && *env) return env;
  return "out";
}

RunResult run_scenario(const Scenario& sc, const std::string& out_dir_override, unsigned seed) {
  RunResult res;
  const std::string dir = resolve_out_dir(sc, out_dir_override);
  std::ostringstream sum;
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(sc.config_hash()));
  sum << sc.run.command << " " << hash << ":";
  try {
    const std::string& cmd = sc.run.command;
    if (cmd == "geodesic") cmd_geodesic(sc, dir, res, sum);
    else if (cmd == "project") cmd_project(sc, dir, res, sum);
    else if (cmd == "compare") cmd_compare(sc, dir, res, sum);
    else if (cmd == "characteristic") cmd_characteristic(sc, dir, res, sum);
    else if (cmd == "alpha") cmd_alpha(sc, dir, res, sum);
    else if (cmd == "reduce") cmd_reduce(sc, dir, res, sum, seed);
    else throw ScenarioError("unknown run.command '" + cmd + "'");
  } catch (const ode::IntegrationError& e) {
    res.exit_code = kIntegrationFail;
    sum << " error: " << e.what();
  } catch (const NonconvergenceError& e) {
    res.exit_code = kNonconvergence;
    sum << " error: " << e.what();
  } catch (const ComparisonError& e) {
    res.exit_code = kThresholdFail;
    sum << " error: " << e.what();
  } catch (const ConfigError& e) {  // includes ScenarioError
    res.exit_code = kConfigError;
    sum << " error: " << e.what();
  } catch (const DomainError& e) {
    res.exit_code = kConfigError;
    sum << " error: " << e.what();
  } catch (const std::exception& e) {
    res.exit_code = kFailure;
    sum << " error: " << e.what();
  }
  res.summary = sum.str();
  return res;
}

}  // namespace kk
