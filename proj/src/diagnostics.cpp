#include "fbmhd/diagnostics.hpp"

#include "fbmhd/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace fbmhd {

const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> cols = {"t",         "e_phys",    "d_phys",    "e_tan",
                                                "e_low",     "mean_h",    "mean_v1",   "div_v_res",
                                                "div_b_res", "vorticity_norm"};
  return cols;
}

std::vector<double> record_values(const DiagnosticsRecord& r) {
  return {r.t,       r.e_phys,  r.d_phys,    r.e_tan,     r.e_low,
          r.mean_h,  r.mean_v1, r.div_v_res, r.div_b_res, r.vorticity_norm};
}

DiagnosticsRecord record_from_values(const std::vector<double>& v) {
  if (v.size() != record_columns().size()) throw std::invalid_argument("record: wrong column count");
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9]};
}

double physical_energy(const Grid& g, const Params& p, const State& s, Mode mode) {
  const VolumeField dens = s.v.c1.square() + s.v.c2.square() + s.b.c1.square() + s.b.c2.square();
  const SurfaceField hp = ddx1(g, s.h);
  if (mode == Mode::linear) {
    return 0.5 * (integrate_volume(g, dens) +
                  integrate_surface(g, p.g * s.h.square() + p.sigma * hp.square()));
  }
  const Geometry geo = build_geometry(g, s.h, g.surface_zeros(), 0.0);
  // sqrt(1+x)-1 written to avoid cancellation at small slope
  const SurfaceField arc = hp.square() / ((1.0 + hp.square()).sqrt() + 1.0);
  return 0.5 * (integrate_volume(g, dens * geo.j) +
                integrate_surface(g, p.g * s.h.square() + 2.0 * p.sigma * arc));
}

double physical_dissipation(const Grid& g, const Params& p, const State& s, Mode mode) {
  const Geometry geo = mode == Mode::linear ? flat_geometry(g)
                                            : build_geometry(g, s.h, g.surface_zeros(), 0.0);
  const VectorVolumeField g1 = grad_phi(g, geo, s.b.c1);
  const VectorVolumeField g2 = grad_phi(g, geo, s.b.c2);
  const VolumeField dens = g1.c1.square() + g1.c2.square() + g2.c1.square() + g2.c2.square();
  return p.kappa * integrate_volume(g, dens * geo.j);
}

std::pair<double, double> mean_drift(const Grid& g, const State& s, Mode mode) {
  if (mode == Mode::linear) return {integrate_surface(g, s.h), integrate_volume(g, s.v.c1)};
  const Geometry geo = build_geometry(g, s.h, g.surface_zeros(), 0.0);
  return {integrate_surface(g, s.h), integrate_volume(g, s.v.c1 * geo.j)};
}

namespace {

double aniso_sq(const Grid& g, const VectorVolumeField& f, int m, int l) {
  const double a = anisotropic_norm(g, f.c1, m, l);
  const double b = anisotropic_norm(g, f.c2, m, l);
  return a * a + b * b;
}

double vol_sq(const Grid& g, const VectorVolumeField& f, int m) {
  const double a = volume_norm(g, f.c1, m);
  const double b = volume_norm(g, f.c2, m);
  return a * a + b * b;
}

double surf_sq(const Grid& g, const SurfaceField& h, double s) {
  const double n = surface_norm(g, h, s);
  return n * n;
}

}  // namespace

double tangential_energy(const Grid& g, const State& s, int n) {
  if (n < 0 || n > 3) throw std::domain_error("tangential_energy: order must lie in 0..3");
  return aniso_sq(g, s.v, 0, n) + aniso_sq(g, s.b, 0, n) + surf_sq(g, s.h, n + 1.0);
}

double low_energy(const Stepper& st, const State& s, const Tendency& t, int n) {
  if (n < 1 || n > 3) throw std::domain_error("low_energy: order must lie in 1..3");
  const Grid& g = st.grid();
  const VectorVolumeField diff = st.flat_diffusion(s.b);
  const VectorVolumeField dtb{t.db.c1 + diff.c1, t.db.c2 + diff.c2};
  const double qn = volume_norm(g, t.q, n);
  return vol_sq(g, s.v, n - 1) + aniso_sq(g, s.v, 0, n) + vol_sq(g, t.dv, n - 1) +
         vol_sq(g, s.b, n) + vol_sq(g, dtb, n) + qn * qn + surf_sq(g, s.h, n + 1.5) +
         surf_sq(g, t.dh, n + 0.5);
}

DiagnosticsRecord make_record(const Stepper& st, const State& s, const Tendency& t, int order) {
  const Grid& g = st.grid();
  const Params& p = st.params();
  const Mode mode = st.config().mode;
  DiagnosticsRecord r;
  r.t = s.t;
  r.e_phys = physical_energy(g, p, s, mode);
  r.d_phys = physical_dissipation(g, p, s, mode);
  r.e_tan = tangential_energy(g, s, order);
  r.e_low = low_energy(st, s, t, std::max(order, 1));
  const auto [mh, mv] = mean_drift(g, s, st.config().mode);
  r.mean_h = mh;
  r.mean_v1 = mv;
  r.div_v_res = std::sqrt(l2_squared(g, div_phi(g, t.geo, s.v)));
  r.div_b_res = std::sqrt(l2_squared(g, div_phi(g, t.geo, s.b)));
  r.vorticity_norm = std::sqrt(l2_squared(g, curl_phi(g, t.geo, s.v)));
  return r;
}

double energy_identity_residual(const TimeSeries& series, double t1, double t2) {
  std::vector<const DiagnosticsRecord*> w;
  for (const auto& r : series.records)
    if (r.t >= t1 - 1e-12 && r.t <= t2 + 1e-12) w.push_back(&r);
  if (w.size() < 2) throw std::invalid_argument("energy_identity_residual: window needs two records");
  double diss = 0.0;
  double emax = 0.0;
  for (size_t i = 0; i < w.size(); ++i) {
    emax = std::max(emax, w[i]->e_phys);
    if (i > 0) diss += 0.5 * (w[i]->t - w[i - 1]->t) * (w[i]->d_phys + w[i - 1]->d_phys);
  }
  return std::abs(w.back()->e_phys - w.front()->e_phys + diss) / std::max(emax, 1e-14);
}

double series_value(const DiagnosticsRecord& r, SeriesField f) {
  switch (f) {
    case SeriesField::e_phys:
      return r.e_phys;
    case SeriesField::d_phys:
      return r.d_phys;
    case SeriesField::e_tan:
      return r.e_tan;
    case SeriesField::e_low:
      return r.e_low;
    case SeriesField::vorticity_norm:
      return r.vorticity_norm;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

DecayFit decay_fit(const TimeSeries& series, SeriesField field, double t_start, double t_end) {
  double st = 0, sy = 0, stt = 0, sty = 0, syy = 0;
  int n = 0;
  for (const auto& r : series.records) {
    if (r.t < t_start - 1e-12 || r.t > t_end + 1e-12) continue;
    const double y = series_value(r, field);
    if (!(y > 0.0)) {
      std::ostringstream msg;
      msg << "decay_fit: nonpositive sample " << y << " at t = " << r.t;
      throw std::domain_error(msg.str());
    }
    const double ly = std::log(y);
    st += r.t;
    sy += ly;
    stt += r.t * r.t;
    sty += r.t * ly;
    syy += ly * ly;
    ++n;
  }
  if (n < 10) throw std::invalid_argument("decay_fit: needs at least 10 records after t_start");
  const double ctt = stt - st * st / n;
  const double cty = sty - st * sy / n;
  const double cyy = syy - sy * sy / n;
  DecayFit fit;
  fit.samples = n;
  fit.rate = cty / ctt;
  fit.r2 = cyy > 0.0 ? (cty * cty) / (ctt * cyy) : 1.0;
  return fit;
}

TimeSeries simulate(const Stepper& st, const State& init, double t_end, double record_every,
                    const SimulateOptions& opts) {
  const double dt = st.config().dt;
  if (!(t_end >= 0.0)) throw ConfigError("simulate: t_end must be nonnegative");
  const long steps = std::lround(t_end / dt);
  if (std::abs(steps * dt - t_end) > 1e-9 * std::max(1.0, t_end))
    throw ConfigError("simulate: t_end is not a whole number of steps");
  long every = 1;
  if (steps > 0) {
    if (!(record_every > 0.0)) throw ConfigError("simulate: record_every must be positive");
    every = std::lround(record_every / dt);
    if (every < 1 || std::abs(every * dt - record_every) > 1e-9 * std::max(1.0, record_every))
      throw ConfigError("simulate: record_every is not a whole number of steps");
  }

  TimeSeries series;
  State s = init;
  bool alarmed = false;
  const double t0 = init.t;
  for (long n = 0;; ++n) {
    const Tendency tend = st.tendency(s);
    if (n % every == 0) {
      DiagnosticsRecord r = make_record(st, s, tend, opts.diag_order);
      series.records.push_back(r);
      if (opts.on_record) opts.on_record(r);
      if (!alarmed && r.div_b_res > opts.div_b_alarm && opts.on_alarm) {
        std::ostringstream msg;
        msg << "div b residual " << r.div_b_res << " exceeds " << opts.div_b_alarm << " at t = " << r.t;
        opts.on_alarm(msg.str());
        alarmed = true;
      }
    }
    if (n == steps) {
      if (opts.final_state) *opts.final_state = s;
      break;
    }
    s = st.step(s, &tend);
    s.t = t0 + (n + 1) * dt;
    if (opts.checkpoint_every > 0 && (n + 1) % opts.checkpoint_every == 0 && opts.on_checkpoint)
      opts.on_checkpoint(s);
  }
  return series;
}

}  // namespace fbmhd
