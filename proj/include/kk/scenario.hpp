#ifndef KK_SCENARIO_HPP
#define KK_SCENARIO_HPP

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kk/fields.hpp"
#include "kk/reduction.hpp"

// Sectioned key-value scenario files; exact grammar in docs/scenario-format.md.

namespace kk {

struct ScenarioError : ConfigError {
  using ConfigError::ConfigError;
};

struct Scenario {
  ScenarioConfig cfg;

  // raw field sources, kept for faithful re-serialization
  std::string a_src = "a0";
  std::array<std::string, 4> A_src = {"0", "0", "0", "0"};
  std::string g0_src = "minkowski";
  std::map<std::string, std::string> g0_components;  // "tt" -> expr, overrides g0_src

  struct Particle {
    double m = 1.0;
    double q = 0.0;
    int epsilon = 1;
    std::vector<double> x0;   // base coordinates
    std::vector<double> dir;  // base direction (seeding)
    double fiber0 = 0.0;
  };
  std::vector<Particle> particles;

  struct Run {
    std::string command = "compare";
    double span = 10.0;
    int samples = 1001;
    double compare_threshold = 1e-6;
    double perturb_u0 = 0.0;
  };
  Run run;

  LatticeSpec lattice;
  std::vector<int> modes = {0, 1, 2};
  int levels = 1;
  std::vector<double> ic_k = {1, 2, 1};
  std::vector<double> ic_amp = {1.0, 0.8, 0.5};
  double mass = 1.0;  // field mass for reduce runs

  std::string out_dir;  // empty = $KK_OUT_DIR or "out"

  // compiled artifacts
  FieldBundle fields;

  std::string serialize() const;
  uint64_t config_hash() const;
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

// Compile the raw field sources into evaluators (done by parse/load; exposed
// for programmatic scenario construction).
void compile_fields(Scenario& sc);

uint64_t fnv1a64(const std::string& s);

}  // namespace kk

#endif
