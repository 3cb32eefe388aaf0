#include "commands.hpp"

#include "fbmhd/checkpoint.hpp"
#include "fbmhd/config.hpp"
#include "fbmhd/errors.hpp"
#include "fbmhd/lemmas.hpp"
#include "fbmhd/modes.hpp"
#include "fbmhd/series_io.hpp"
#include "fbmhd/vorticity.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fbmhd::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Failure {
  int code;
  std::string reason;
};

// Every failure path funnels through here so the code/reason pair is the
// same on stderr and in the sidecar.
Failure classify(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const ConfigError& x) {
    return {kConfig, x.what()};
  } catch (const DiffeomorphismFailure& x) {
    return {kDiffeomorphism, x.what()};
  } catch (const CompatibilityViolation& x) {
    return {kCompatibility, x.what()};
  } catch (const NoConvergence& x) {
    return {kNoConvergence, x.what()};
  } catch (const SingularSystem& x) {
    return {kSingular, x.what()};
  } catch (const CheckpointError& x) {
    return {x.kind() == CheckpointError::Kind::mismatch ? kConfig : kIo, x.what()};
  } catch (const SeriesFormatError& x) {
    return {kIo, x.what()};
  } catch (const fs::filesystem_error& x) {
    return {kIo, x.what()};
  } catch (const std::invalid_argument& x) {
    return {kConfig, x.what()};
  } catch (const std::exception& x) {
    return {kInternal, x.what()};
  }
}

const char* status_name(int code) {
  switch (code) {
    case kOk: return "ok";
    case kConfig: return "config_error";
    case kDiffeomorphism: return "diffeomorphism_failure";
    case kCompatibility: return "compatibility_violation";
    case kNoConvergence: return "no_convergence";
    case kSingular: return "singular_system";
    case kIo: return "io_error";
    case kAuditFailed: return "audit_failed";
    default: return "internal_error";
  }
}

int report(const Failure& f) {
  std::cerr << "fbmhd: " << f.reason << '\n';
  return f.code;
}

RunConfig load(const CommonArgs& a) {
  RunConfig c = load_config(a.config);
  if (a.seed) c.seed = *a.seed;
  return c;
}

fs::path prepare_out(const CommonArgs& a, const RunConfig& c) {
  fs::path dir = resolve_out_dir(a.out, c.out_dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << text << '\n';
}

}  // namespace

std::string resolve_out_dir(const std::string& flag, const std::string& from_config) {
  fs::path dir = flag.empty() ? fs::path(from_config) : fs::path(flag);
  const char* root = std::getenv(kOutRootEnv);
  if (root && *root && dir.is_relative()) dir = fs::path(root) / dir;
  return dir.string();
}

int cmd_simulate(const CommonArgs& a, const std::string& resume) {
  RunConfig cfg;
  fs::path dir;
  try {
    cfg = load(a);
    dir = prepare_out(a, cfg);
  } catch (...) {
    return report(classify(std::current_exception()));
  }

  RunMetadata meta;
  meta.command = "simulate";
  meta.config = cfg;
  meta.has_config = true;
  const fs::path meta_path = dir / "run.json";

  std::unique_ptr<SeriesWriter> writer;
  try {
    const Grid grid(cfg.nx, cfg.nz);
    const Stepper st(grid, cfg.params, cfg.step_config());
    State init;
    if (resume.empty()) {
      init = make_initial_data(st, cfg.init_spec());
    } else {
      init = load_checkpoint(resume, grid);
      st.refresh(init, true);
    }
    const double duration = cfg.t_end - init.t;
    if (duration < -1e-12) throw ConfigError("simulate: checkpoint time lies past t_end");

    writer = std::make_unique<SeriesWriter>((dir / "series.csv").string());
    SimulateOptions opts;
    opts.checkpoint_every = cfg.checkpoint_every;
    opts.on_record = [&](const DiagnosticsRecord& r) {
      writer->append(r);
      meta.records = writer->rows();
      meta.t_reached = r.t;
    };
    opts.on_checkpoint = [&](const State& s) {
      const long step = std::lround(s.t / cfg.dt);
      char name[40];
      std::snprintf(name, sizeof name, "checkpoint_%08ld.bin", step);
      write_checkpoint((dir / name).string(), grid, cfg.params, s);
    };
    opts.on_alarm = [&](const std::string& msg) {
      std::cerr << "fbmhd: warning: " << msg << '\n';
      meta.alarms.push_back(msg);
    };
    State final_state;
    opts.final_state = &final_state;
    const TimeSeries series = simulate(st, init, std::max(duration, 0.0), cfg.record_every, opts);
    write_checkpoint((dir / "final.bin").string(), grid, cfg.params, final_state);

    json audits = json::object();
    const auto& rec = series.records;
    if (cfg.audit_energy && rec.size() >= 2)
      audits["energy_identity_residual"] = energy_identity_residual(series, rec.front().t, rec.back().t);
    if (cfg.audit_means && !rec.empty())
      audits["mean_drift"] = {{"h", std::abs(rec.back().mean_h - rec.front().mean_h)},
                              {"v1", std::abs(rec.back().mean_v1 - rec.front().mean_v1)}};
    if (cfg.audit_vorticity) {
      // two extra steps past t_end give a centred stencil
      const State mid = st.step(final_state);
      const State next = st.step(mid);
      const VorticityAudit va = vorticity_residual(grid, cfg.params, cfg.mode, final_state, mid, next);
      audits["vorticity"] = {{"relative_residual", va.relative_residual},
                             {"relative_residual_div_b_corrected", va.relative_corrected},
                             {"div_b_norm", va.div_b_norm},
                             {"damping_coefficient", va.damping_coeff}};
    }
    write_text(dir / "audits.json", audits.dump(2));
    writer.reset();
    write_metadata_json(meta_path.string(), meta);
    return kOk;
  } catch (...) {
    writer.reset();  // rows so far are already on disk
    const Failure f = classify(std::current_exception());
    meta.status = status_name(f.code);
    meta.exit_code = f.code;
    meta.failure_reason = f.reason;
    try {
      write_metadata_json(meta_path.string(), meta);
    } catch (const std::exception& e) {
      std::cerr << "fbmhd: " << e.what() << '\n';
    }
    return report(f);
  }
}

int cmd_modes(const CommonArgs& a, std::optional<int> k_max) {
  try {
    const RunConfig cfg = load(a);
    const fs::path dir = prepare_out(a, cfg);
    const int kmax = k_max.value_or(cfg.k_max);
    if (kmax < 1) throw ConfigError("modes: k_max must be at least 1");

    std::vector<Spectrum> spectra;
    json per_k = json::array();
    for (int k = 1; k <= kmax; ++k) {
      const ModeOperator op = assemble(k, cfg.params, cfg.nz);
      spectra.push_back(spectrum(op));
      const Spectrum& s = spectra.back();
      json counts = json::object();
      for (const Eigenpair& e : s.pairs) counts[branch_name(e.branch)] = counts.value(branch_name(e.branch), 0) + 1;
      per_k.push_back({{"k", k}, {"abscissa", s.abscissa}, {"counts", counts}});
    }
    std::ofstream csv(dir / "spectrum.csv", std::ios::trunc);
    if (!csv) throw fs::filesystem_error("cannot write spectrum", dir / "spectrum.csv", std::error_code());
    write_spectrum_csv(csv, spectra);

    double global = -INFINITY;
    for (const Spectrum& s : spectra) global = std::max(global, s.abscissa);
    json j = {{"version", version_string()},
              {"nz", cfg.nz},
              {"params", json::parse(config_to_json(cfg))["params"]},
              {"per_k", per_k},
              {"abscissa", global}};
    write_text(dir / "modes.json", j.dump(2));
    return kOk;
  } catch (...) {
    return report(classify(std::current_exception()));
  }
}

int cmd_lemmas(const CommonArgs& a) {
  try {
    const RunConfig cfg = load(a);
    const fs::path dir = prepare_out(a, cfg);
    LemmaSuiteOptions o;
    o.nx = cfg.nx;
    o.nz = cfg.nz;
    o.samples = cfg.lemma_samples;
    o.seed = cfg.seed;
    o.bbar1 = cfg.params.bbar1;
    o.bbar2 = cfg.params.bbar2;
    const std::vector<LemmaReport> r = run_lemma_suite(o);
    write_text(dir / "lemmas.json", lemma_report_json(o, r));
    bool ok = true;
    for (const LemmaReport& x : r) {
      std::printf("%-16s max %.6g refined %.6g %s\n", x.name.c_str(), x.max_ratio, x.max_ratio_fine,
                  x.pass ? "pass" : "FAIL");
      ok = ok && x.pass;
    }
    return ok ? kOk : kAuditFailed;
  } catch (...) {
    return report(classify(std::current_exception()));
  }
}

int cmd_energy_audit(const std::string& series_path, const std::string& out, double tol) {
  try {
    const TimeSeries s = read_series_csv(series_path);
    if (s.records.size() < 2) throw SeriesFormatError("energy-audit: need at least two records");
    bool finite = true, nonneg = true;
    for (const DiagnosticsRecord& r : s.records) {
      for (double x : record_values(r)) finite = finite && std::isfinite(x);
      nonneg = nonneg && r.e_phys >= 0.0 && r.d_phys >= 0.0;
    }
    const double resid = finite ? energy_identity_residual(s, s.records.front().t, s.records.back().t) : NAN;
    const bool ok = finite && nonneg && resid <= tol;
    json j = {{"series", series_path},
              {"records", s.records.size()},
              {"energy_identity_residual", resid},
              {"tolerance", tol},
              {"finite", finite},
              {"nonnegative", nonneg},
              {"pass", ok}};
    std::printf("energy identity residual %.6g (tol %.3g): %s\n", resid, tol, ok ? "pass" : "FAIL");
    if (!out.empty()) {
      const fs::path dir = resolve_out_dir(out, out);
      fs::create_directories(dir);
      write_text(dir / "energy_audit.json", j.dump(2));
    }
    return ok ? kOk : kAuditFailed;
  } catch (...) {
    return report(classify(std::current_exception()));
  }
}

}  // namespace fbmhd::cli
