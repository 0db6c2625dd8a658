#include "kk/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace kk {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int coord_slot(const std::string& c, const std::string& ctx) {
  if (c.size() == 1) {
    size_t p = std::string("txyz").find(c[0]);
    if (p != std::string::npos) return static_cast<int>(p);
  }
  throw ScenarioError(ctx + ": '" + c + "' is not a coordinate (t, x, y or z)");
}

double to_double(const std::string& v, const std::string& ctx) {
  try {
    size_t used = 0;
    double d = std::stod(v, &used);
    if (trim(v.substr(used)).empty()) return d;
  } catch (const std::exception&) {
  }
  throw ScenarioError(ctx + ": expected a number, got '" + v + "'");
}

int to_int(const std::string& v, const std::string& ctx) {
  double d = to_double(v, ctx);
  int i = static_cast<int>(d);
  if (i != d) throw ScenarioError(ctx + ": expected an integer, got '" + v + "'");
  return i;
}

std::vector<double> to_doubles(const std::string& v, const std::string& ctx) {
  std::istringstream in(v);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(to_double(tok, ctx));
  return out;
}

std::vector<int> to_ints(const std::string& v, const std::string& ctx) {
  std::vector<int> out;
  for (double d : to_doubles(v, ctx)) {
    int i = static_cast<int>(d);
    if (i != d) throw ScenarioError(ctx + ": expected integers");
    out.push_back(i);
  }
  return out;
}

// "@family(key=value, ...)" -> ScalarField with exact derivatives.
ScalarField parse_family(const std::string& src, const std::string& ctx) {
  size_t open = src.find('(');
  if (open == std::string::npos || src.back() != ')')
    throw ScenarioError(ctx + ": malformed field family '" + src + "'");
  std::string name = trim(src.substr(1, open - 1));
  std::map<std::string, std::string> kv;
  std::string body = src.substr(open + 1, src.size() - open - 2);
  std::istringstream in(body);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw ScenarioError(ctx + ": family parameter '" + item + "' is not key=value");
    kv[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
  }
  auto num = [&](const std::string& key, double dflt, bool required = false) {
    auto it = kv.find(key);
    if (it == kv.end()) {
      if (required) throw ScenarioError(ctx + ": family '" + name + "' needs parameter " + key);
      return dflt;
    }
    return to_double(it->second, ctx + "." + key);
  };
  int coord = 1;
  if (auto it = kv.find("coord"); it != kv.end()) coord = coord_slot(it->second, ctx);

  if (name == "constant") return constant_scalar(num("value", 0.0, true));
  if (name == "sinusoidal")
    return sinusoidal_scalar(num("base", 1.0), num("amp", 0.0, true), num("k", 1.0), coord,
                             num("phase", 0.0));
  if (name == "linear") return linear_scalar(num("base", 0.0), num("slope", 0.0, true), coord);
  if (name == "gaussian_bump")
    return gaussian_bump_scalar(num("base", 0.0), num("amp", 1.0, true), num("center", 0.0),
                                num("width", 1.0), coord);
  throw ScenarioError(ctx + ": unknown field family '" + name + "'");
}

ScalarField compile_scalar(const std::string& src, const std::map<std::string, double>& consts,
                           const std::string& ctx) {
  if (!src.empty() && src[0] == '@') return parse_family(src, ctx);
  try {
    return expression_scalar(Expression::parse(src, consts));
  } catch (const ParseError& e) {
    throw ScenarioError(ctx + ": " + e.what());
  }
}

}  // namespace

uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void compile_fields(Scenario& sc) {
  const std::map<std::string, double> consts = {
      {"beta", sc.cfg.beta}, {"a0", sc.cfg.a0}, {"hbar", sc.cfg.hbar}};
  sc.fields.dim = sc.cfg.base_dim;
  sc.fields.a = compile_scalar(sc.a_src, consts, "fields.a");

  std::vector<ScalarField> Acomp;
  for (int i = 0; i < sc.cfg.base_dim; ++i)
    Acomp.push_back(compile_scalar(sc.A_src[i], consts, std::string("fields.A_") + "txyz"[i]));
  sc.fields.A = covector_from_components(std::move(Acomp));

  const int d = sc.cfg.base_dim;
  if (sc.g0_components.empty()) {
    if (sc.g0_src != "minkowski")
      throw ScenarioError("fields.g0: unknown named metric '" + sc.g0_src + "'");
    sc.fields.g0 = minkowski_metric(d);
  } else {
    std::vector<std::vector<ScalarField>> comps(d, std::vector<ScalarField>(d));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        comps[i][j] = constant_scalar(i == j ? (i == 0 ? 1.0 : -1.0) : 0.0);
    for (const auto& [key, expr] : sc.g0_components) {
      if (key.size() != 2) throw ScenarioError("fields.g0_" + key + ": bad component name");
      int i = coord_slot(key.substr(0, 1), "fields.g0_" + key);
      int j = coord_slot(key.substr(1, 1), "fields.g0_" + key);
      if (i >= d || j >= d)
        throw ScenarioError("fields.g0_" + key + ": component outside base dimension");
      auto f = compile_scalar(expr, consts, "fields.g0_" + key);
      comps[i][j] = f;
      comps[j][i] = f;
    }
    sc.fields.g0 = metric_from_components(d, comps);
  }
}

Scenario parse_scenario(const std::string& text) {
  Scenario sc;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  bool saw_constants = false;

  auto unknown = [](const std::string& where, const std::string& key) {
    throw ScenarioError(where + ": unknown key '" + key + "'");
  };

  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ScenarioError("line " + std::to_string(lineno) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section == "particle") sc.particles.emplace_back();
      if (section == "constants") saw_constants = true;
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ScenarioError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    std::string ctx = section + "." + key;

    if (section == "constants") {
      if (key == "beta") sc.cfg.beta = to_double(val, ctx);
      else if (key == "a0") sc.cfg.a0 = to_double(val, ctx);
      else if (key == "hbar") sc.cfg.hbar = to_double(val, ctx);
      else if (key == "epsilon") sc.cfg.epsilon = to_int(val, ctx);
      else if (key == "varepsilon") sc.cfg.varepsilon = to_int(val, ctx);
      else if (key == "base_dim") sc.cfg.base_dim = to_int(val, ctx);
      else if (key == "fiber") {
        if (val == "u1") sc.cfg.fiber_compact = true;
        else if (val == "line") sc.cfg.fiber_compact = false;
        else throw ScenarioError(ctx + ": expected 'u1' or 'line'");
      } else unknown("constants", key);
    } else if (section == "fields") {
      if (key == "a") sc.a_src = val;
      else if (key.rfind("A_", 0) == 0 && key.size() == 3)
        sc.A_src[coord_slot(key.substr(2), ctx)] = val;
      else if (key == "g0") sc.g0_src = val;
      else if (key.rfind("g0_", 0) == 0) sc.g0_components[key.substr(3)] = val;
      else unknown("fields", key);
    } else if (section == "particle") {
      if (sc.particles.empty()) throw ScenarioError("particle keys outside a [particle] section");
      auto& p = sc.particles.back();
      if (key == "m") p.m = to_double(val, ctx);
      else if (key == "q") p.q = to_double(val, ctx);
      else if (key == "epsilon") p.epsilon = to_int(val, ctx);
      else if (key == "x0") p.x0 = to_doubles(val, ctx);
      else if (key == "dir") p.dir = to_doubles(val, ctx);
      else if (key == "fiber0") p.fiber0 = to_double(val, ctx);
      else unknown("particle", key);
    } else if (section == "run") {
      if (key == "command") sc.run.command = val;
      else if (key == "span") sc.run.span = to_double(val, ctx);
      else if (key == "samples") sc.run.samples = to_int(val, ctx);
      else if (key == "abs_tol") sc.cfg.abs_tol = to_double(val, ctx);
      else if (key == "rel_tol") sc.cfg.rel_tol = to_double(val, ctx);
      else if (key == "fd_step") sc.cfg.fd_step = to_double(val, ctx);
      else if (key == "fd_order") sc.cfg.fd_order = to_int(val, ctx);
      else if (key == "compare_threshold") sc.run.compare_threshold = to_double(val, ctx);
      else if (key == "perturb_u0") sc.run.perturb_u0 = to_double(val, ctx);
      else unknown("run", key);
    } else if (section == "lattice") {
      if (key == "nx") sc.lattice.nx = to_int(val, ctx);
      else if (key == "ny") sc.lattice.ny = to_int(val, ctx);
      else if (key == "x_min") sc.lattice.x_min = to_double(val, ctx);
      else if (key == "x_max") sc.lattice.x_max = to_double(val, ctx);
      else if (key == "t_final") sc.lattice.t_final = to_double(val, ctx);
      else if (key == "cfl") sc.lattice.cfl = to_double(val, ctx);
      else if (key == "ht") sc.lattice.ht_override = to_double(val, ctx);
      else if (key == "modes") sc.modes = to_ints(val, ctx);
      else if (key == "levels") sc.levels = to_int(val, ctx);
      else if (key == "ic_k") sc.ic_k = to_doubles(val, ctx);
      else if (key == "ic_amp") sc.ic_amp = to_doubles(val, ctx);
      else if (key == "mass") sc.mass = to_double(val, ctx);
      else unknown("lattice", key);
    } else if (section == "output") {
      if (key == "dir") sc.out_dir = val;
      else unknown("output", key);
    } else if (section.empty()) {
      throw ScenarioError("line " + std::to_string(lineno) + ": key outside any section");
    } else {
      throw ScenarioError("unknown section [" + section + "]");
    }
  }

  if (!saw_constants) throw ScenarioError("missing required section [constants]");
  sc.cfg.validate();
  for (size_t i = 0; i < sc.particles.size(); ++i) {
    auto& p = sc.particles[i];
    std::string ctx = "particle #" + std::to_string(i + 1);
    if (p.m < 0) throw ScenarioError(ctx + ": m must be >= 0");
    if (p.epsilon < -1 || p.epsilon > 1) throw ScenarioError(ctx + ": epsilon must be -1, 0 or 1");
    if (p.x0.empty()) p.x0.assign(sc.cfg.base_dim, 0.0);
    if (p.dir.empty()) {
      p.dir.assign(sc.cfg.base_dim, 0.0);
      p.dir[0] = 1.0;
    }
    if (static_cast<int>(p.x0.size()) != sc.cfg.base_dim ||
        static_cast<int>(p.dir.size()) != sc.cfg.base_dim)
      throw ScenarioError(ctx + ": x0 and dir need base_dim components");
  }
  compile_fields(sc);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string Scenario::serialize() const {
  std::ostringstream o;
  o << "[constants]\n";
  o << "beta = " << fmt(cfg.beta) << "\n";
  o << "a0 = " << fmt(cfg.a0) << "\n";
  o << "hbar = " << fmt(cfg.hbar) << "\n";
  o << "epsilon = " << cfg.epsilon << "\n";
  o << "varepsilon = " << cfg.varepsilon << "\n";
  o << "base_dim = " << cfg.base_dim << "\n";
  o << "fiber = " << (cfg.fiber_compact ? "u1" : "line") << "\n";
  o << "\n[fields]\n";
  o << "a = " << a_src << "\n";
  for (int i = 0; i < cfg.base_dim; ++i)
    if (A_src[i] != "0") o << "A_" << "txyz"[i] << " = " << A_src[i] << "\n";
  if (g0_components.empty()) {
    o << "g0 = " << g0_src << "\n";
  } else {
    for (const auto& [k, v] : g0_components) o << "g0_" << k << " = " << v << "\n";
  }
  for (const auto& p : particles) {
    o << "\n[particle]\n";
    o << "m = " << fmt(p.m) << "\n";
    o << "q = " << fmt(p.q) << "\n";
    o << "epsilon = " << p.epsilon << "\n";
    o << "x0 =";
    for (double v : p.x0) o << " " << fmt(v);
    o << "\ndir =";
    for (double v : p.dir) o << " " << fmt(v);
    o << "\nfiber0 = " << fmt(p.fiber0) << "\n";
  }
  o << "\n[run]\n";
  o << "command = " << run.command << "\n";
  o << "span = " << fmt(run.span) << "\n";
  o << "samples = " << run.samples << "\n";
  o << "abs_tol = " << fmt(cfg.abs_tol) << "\n";
  o << "rel_tol = " << fmt(cfg.rel_tol) << "\n";
  if (cfg.fd_step > 0) o << "fd_step = " << fmt(cfg.fd_step) << "\n";
  if (cfg.fd_order != 4) o << "fd_order = " << cfg.fd_order << "\n";
  o << "compare_threshold = " << fmt(run.compare_threshold) << "\n";
  if (run.perturb_u0 != 0) o << "perturb_u0 = " << fmt(run.perturb_u0) << "\n";
  o << "\n[lattice]\n";
  o << "nx = " << lattice.nx << "\n";
  o << "ny = " << lattice.ny << "\n";
  o << "x_min = " << fmt(lattice.x_min) << "\n";
  o << "x_max = " << fmt(lattice.x_max) << "\n";
  o << "t_final = " << fmt(lattice.t_final) << "\n";
  o << "cfl = " << fmt(lattice.cfl) << "\n";
  if (lattice.ht_override > 0) o << "ht = " << fmt(lattice.ht_override) << "\n";
  o << "modes =";
  for (int n : modes) o << " " << n;
  o << "\nlevels = " << levels << "\n";
  o << "ic_k =";
  for (double v : ic_k) o << " " << fmt(v);
  o << "\nic_amp =";
  for (double v : ic_amp) o << " " << fmt(v);
  o << "\nmass = " << fmt(mass) << "\n";
  if (!out_dir.empty()) o << "\n[output]\ndir = " << out_dir << "\n";
  return o.str();
}

uint64_t Scenario::config_hash() const { return fnv1a64(serialize()); }

}  // namespace kk
