#include "fbmhd/config.hpp"

#include "fbmhd/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#ifndef FBMHD_VERSION
#define FBMHD_VERSION "unknown"
#endif

namespace fbmhd {

namespace {

using nlohmann::json;

void only_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("config: unknown key '" + (where.empty() ? "" : where + ".") + it.key() + "'");
}

const json& need(const json& j, const std::string& where, const std::string& key) {
  if (!j.contains(key)) throw ConfigError("config: missing required key '" + where + "." + key + "'");
  return j.at(key);
}

double number(const json& j, const std::string& name) {
  if (!j.is_number()) throw ConfigError("config: '" + name + "' must be a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw ConfigError("config: '" + name + "' must be finite");
  return x;
}

long long integer(const json& j, const std::string& name) {
  if (!j.is_number_integer()) throw ConfigError("config: '" + name + "' must be an integer");
  return j.get<long long>();
}

bool boolean(const json& j, const std::string& name) {
  if (!j.is_boolean()) throw ConfigError("config: '" + name + "' must be true or false");
  return j.get<bool>();
}

std::vector<int> int_list(const json& j, const std::string& name) {
  if (!j.is_array()) throw ConfigError("config: '" + name + "' must be an array of integers");
  std::vector<int> out;
  for (const json& e : j) out.push_back(static_cast<int>(integer(e, name)));
  return out;
}

}  // namespace

const char* mode_name(Mode m) { return m == Mode::linear ? "linear" : "nonlinear"; }

const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::etdrk4: return "etdrk4";
    case Scheme::rk4_cn: return "rk4_cn";
    case Scheme::euler_cn: return "euler_cn";
  }
  return "?";
}

const char* version_string() { return FBMHD_VERSION; }

StepConfig RunConfig::step_config() const {
  StepConfig c;
  c.dt = dt;
  c.scheme = scheme;
  c.mode = mode;
  return c;
}

InitSpec RunConfig::init_spec() const {
  InitSpec s;
  s.seed = seed;
  s.amplitude = amplitude;
  s.h_modes = h_modes;
  s.v_modes = v_modes;
  return s;
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  only_keys(root, "", {"grid", "params", "mode", "init", "stepping", "output", "audits", "modes", "lemmas"});
  RunConfig c;

  const json& grid = need(root, "", "grid");
  only_keys(grid, "grid", {"nx", "nz"});
  c.nx = static_cast<int>(integer(need(grid, "grid", "nx"), "grid.nx"));
  c.nz = static_cast<int>(integer(need(grid, "grid", "nz"), "grid.nz"));
  if (c.nx < 8 || c.nx % 2 != 0) throw ConfigError("config: grid.nx must be even and >= 8");
  if (c.nz < 8) throw ConfigError("config: grid.nz must be >= 8");

  // physical constants have no defaults
  const json& par = need(root, "", "params");
  only_keys(par, "params", {"g", "sigma", "kappa", "bbar1", "bbar2"});
  c.params.g = number(need(par, "params", "g"), "params.g");
  c.params.sigma = number(need(par, "params", "sigma"), "params.sigma");
  c.params.kappa = number(need(par, "params", "kappa"), "params.kappa");
  c.params.bbar1 = number(need(par, "params", "bbar1"), "params.bbar1");
  c.params.bbar2 = number(need(par, "params", "bbar2"), "params.bbar2");

  const json& mode = need(root, "", "mode");
  if (mode == "linear")
    c.mode = Mode::linear;
  else if (mode == "nonlinear")
    c.mode = Mode::nonlinear;
  else
    throw ConfigError("config: mode must be \"linear\" or \"nonlinear\"");
  c.params.validate(c.mode == Mode::linear);

  const json& init = need(root, "", "init");
  only_keys(init, "init", {"seed", "amplitude", "h_modes", "v_modes"});
  const long long seed = integer(need(init, "init", "seed"), "init.seed");
  if (seed < 0) throw ConfigError("config: init.seed must be nonnegative");
  c.seed = static_cast<std::uint64_t>(seed);
  c.amplitude = number(need(init, "init", "amplitude"), "init.amplitude");
  if (c.amplitude < 0.0 || c.amplitude > kMaxAmplitude)
    throw ConfigError("config: init.amplitude must lie in [0, 0.05]");
  c.h_modes = int_list(need(init, "init", "h_modes"), "init.h_modes");
  c.v_modes = int_list(need(init, "init", "v_modes"), "init.v_modes");

  const json& st = need(root, "", "stepping");
  only_keys(st, "stepping", {"dt", "t_end", "record_every", "scheme"});
  c.dt = number(need(st, "stepping", "dt"), "stepping.dt");
  c.t_end = number(need(st, "stepping", "t_end"), "stepping.t_end");
  c.record_every = number(need(st, "stepping", "record_every"), "stepping.record_every");
  if (c.dt <= 0.0) throw ConfigError("config: stepping.dt must be positive");
  if (c.t_end < 0.0) throw ConfigError("config: stepping.t_end must be nonnegative");
  if (c.record_every <= 0.0) throw ConfigError("config: stepping.record_every must be positive");
  if (st.contains("scheme")) {
    const json& s = st.at("scheme");
    if (s == "etdrk4")
      c.scheme = Scheme::etdrk4;
    else if (s == "rk4_cn")
      c.scheme = Scheme::rk4_cn;
    else if (s == "euler_cn")
      c.scheme = Scheme::euler_cn;
    else
      throw ConfigError("config: stepping.scheme must be etdrk4, rk4_cn or euler_cn");
  }

  if (root.contains("output")) {
    const json& o = root.at("output");
    only_keys(o, "output", {"dir", "checkpoint_every"});
    if (o.contains("dir")) {
      if (!o.at("dir").is_string()) throw ConfigError("config: output.dir must be a string");
      c.out_dir = o.at("dir").get<std::string>();
    }
    if (o.contains("checkpoint_every")) {
      c.checkpoint_every = static_cast<long>(integer(o.at("checkpoint_every"), "output.checkpoint_every"));
      if (c.checkpoint_every < 0) throw ConfigError("config: output.checkpoint_every must be nonnegative");
    }
  }
  if (root.contains("audits")) {
    const json& a = root.at("audits");
    only_keys(a, "audits", {"energy", "vorticity", "means"});
    if (a.contains("energy")) c.audit_energy = boolean(a.at("energy"), "audits.energy");
    if (a.contains("vorticity")) c.audit_vorticity = boolean(a.at("vorticity"), "audits.vorticity");
    if (a.contains("means")) c.audit_means = boolean(a.at("means"), "audits.means");
  }
  if (root.contains("modes")) {
    const json& m = root.at("modes");
    only_keys(m, "modes", {"k_max"});
    if (m.contains("k_max")) c.k_max = static_cast<int>(integer(m.at("k_max"), "modes.k_max"));
    if (c.k_max < 1) throw ConfigError("config: modes.k_max must be at least 1");
  }
  if (root.contains("lemmas")) {
    const json& l = root.at("lemmas");
    only_keys(l, "lemmas", {"samples"});
    if (l.contains("samples")) c.lemma_samples = static_cast<int>(integer(l.at("samples"), "lemmas.samples"));
    if (c.lemma_samples < 1) throw ConfigError("config: lemmas.samples must be at least 1");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot read " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const RunConfig& c) {
  json j;
  j["grid"] = {{"nx", c.nx}, {"nz", c.nz}};
  j["params"] = {{"g", c.params.g},
                 {"sigma", c.params.sigma},
                 {"kappa", c.params.kappa},
                 {"bbar1", c.params.bbar1},
                 {"bbar2", c.params.bbar2}};
  j["mode"] = mode_name(c.mode);
  j["init"] = {{"seed", c.seed}, {"amplitude", c.amplitude}, {"h_modes", c.h_modes}, {"v_modes", c.v_modes}};
  j["stepping"] = {{"dt", c.dt}, {"t_end", c.t_end}, {"record_every", c.record_every},
                   {"scheme", scheme_name(c.scheme)}};
  j["output"] = {{"dir", c.out_dir}, {"checkpoint_every", c.checkpoint_every}};
  j["audits"] = {{"energy", c.audit_energy}, {"vorticity", c.audit_vorticity}, {"means", c.audit_means}};
  j["modes"] = {{"k_max", c.k_max}};
  j["lemmas"] = {{"samples", c.lemma_samples}};
  return j.dump(2);
}

}  // namespace fbmhd
