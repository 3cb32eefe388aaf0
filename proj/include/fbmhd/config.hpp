#pragma once

#include "fbmhd/dynamics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fbmhd {

/// Largest initial amplitude accepted from a config file.
constexpr double kMaxAmplitude = 0.05;

struct RunConfig {
  int nx = 0;
  int nz = 0;
  Params params;
  Mode mode = Mode::nonlinear;

  std::uint64_t seed = 0;
  double amplitude = 0.0;
  std::vector<int> h_modes;
  std::vector<int> v_modes;

  double dt = 0.0;
  double t_end = 0.0;
  double record_every = 0.0;
  Scheme scheme = Scheme::etdrk4;

  std::string out_dir = "out";
  long checkpoint_every = 0;

  bool audit_energy = true;
  bool audit_vorticity = true;
  bool audit_means = true;

  int k_max = 8;
  int lemma_samples = 200;

  StepConfig step_config() const;
  InitSpec init_spec() const;
};

/// Parses JSON text. Unknown keys, missing physical parameters and values
/// outside their domain raise ConfigError naming the offending key.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// JSON rendering of a config; parse_config(to_json(c)) reproduces c.
std::string config_to_json(const RunConfig& c);

const char* mode_name(Mode m);
const char* scheme_name(Scheme s);

/// Version string baked in at configure time.
const char* version_string();

}  // namespace fbmhd
