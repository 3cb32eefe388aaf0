#include "fbmhd/vorticity.hpp"

#include "fbmhd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fbmhd {

namespace {

double norm0(const Grid& g, const VolumeField& f) { return std::sqrt(l2_squared(g, f)); }

Geometry geometry_of(const Grid& g, const State& s) {
  if (s.h.size() == 0 || s.h.abs().maxCoeff() == 0.0) return flat_geometry(g);
  // the audit inspects states, it does not police the floor
  return build_geometry(g, s.h, g.surface_zeros(), 0.0);
}

// Bbar x v and the shear potential Bbar1 Bbar x v - Bbar2 Bbar.v
VolumeField cross(const Params& p, const VectorVolumeField& v) {
  return p.bbar1 * v.c2 - p.bbar2 * v.c1;
}
VolumeField shear_potential(const Params& p, const VectorVolumeField& v) {
  return p.bbar1 * cross(p, v) - p.bbar2 * (p.bbar1 * v.c1 + p.bbar2 * v.c2);
}

}  // namespace

double damping_coefficient(const Params& p) {
  if (!(p.kappa > 0.0)) throw ConfigError("damping_coefficient: kappa must be positive");
  return p.bbar2 * p.bbar2 / p.kappa;
}

double curl_identity_check(const Grid& g, const Params& p, const State& s) {
  const Geometry geo = geometry_of(g, s);
  const VolumeField cb = curl_phi(g, geo, s.b);
  const VolumeField lhs1 = p.bbar1 * dphi1(g, geo, cb) + p.bbar2 * dphi2(g, geo, cb);
  const VolumeField rhs1 =
      p.bbar1 * laplace_phi(g, geo, s.b.c2) - p.bbar2 * laplace_phi(g, geo, s.b.c1);

  const VolumeField y = cross(p, s.v);
  const VolumeField lhs2 = p.bbar1 * dphi1(g, geo, y) + p.bbar2 * dphi2(g, geo, y);
  const VolumeField rhs2 =
      p.bbar2 * p.bbar2 * curl_phi(g, geo, s.v) + dphi1(g, geo, shear_potential(p, s.v));
  return std::max((lhs1 - rhs1).abs().maxCoeff(), (lhs2 - rhs2).abs().maxCoeff());
}

VorticityAudit vorticity_residual(const Grid& g, const Params& p, Mode mode, const State& prev,
                                  const State& mid, const State& next) {
  const double dt = mid.t - prev.t;
  const double dt2 = next.t - mid.t;
  if (!(dt > 0.0) || std::abs(dt2 - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
    throw std::invalid_argument("vorticity_residual: states must be spaced by a uniform dt");
  const double kinv = 1.0 / p.kappa;
  const bool nl = mode == Mode::nonlinear;

  const Geometry gp = nl ? geometry_of(g, prev) : flat_geometry(g);
  const Geometry gm = nl ? geometry_of(g, mid) : flat_geometry(g);
  const Geometry gn = nl ? geometry_of(g, next) : flat_geometry(g);
  const VolumeField dt_eta = (gn.eta - gp.eta) / (2.0 * dt);

  VorticityAudit a;
  a.damping_coeff = damping_coefficient(p);
  a.omega = curl_phi(g, gm, mid.v);
  const VolumeField d2_omega = dphi2(g, gm, a.omega);
  a.dt_omega = (curl_phi(g, gn, next.v) - curl_phi(g, gp, prev.v)) / (2.0 * dt);
  if (nl) a.dt_omega -= dt_eta * d2_omega;
  a.advection = nl ? VolumeField(mid.v.c1 * dphi1(g, gm, a.omega) + mid.v.c2 * d2_omega)
                   : g.zeros();
  a.damping = a.damping_coeff * a.omega;

  const VolumeField x = shear_potential(p, mid.v);
  a.shear = -kinv * ddx1(g, x);
  const VolumeField c_mid = cross(p, mid.b);
  a.induction = kinv * (cross(p, next.b) - cross(p, prev.b)) / (2.0 * dt);

  a.phi = {g.zeros(), g.zeros(), g.zeros(), g.zeros()};
  if (nl) {
    const VolumeField y = cross(p, mid.v);
    a.phi.tilt = kinv * gm.deta1 * dphi2(g, gm, x);
    a.phi.surface_motion = -kinv * dt_eta * dphi2(g, gm, c_mid);
    a.phi.cross_transport = kinv * (advect_phi(g, gm, mid.v, c_mid) - advect_phi(g, gm, mid.b, y));
    const VectorVolumeField bgb{advect_phi(g, gm, mid.b, mid.b.c1),
                                advect_phi(g, gm, mid.b, mid.b.c2)};
    a.phi.lorentz = curl_phi(g, gm, bgb);
  }
  const VolumeField phi_sum =
      a.phi.tilt + a.phi.surface_motion + a.phi.cross_transport + a.phi.lorentz;

  a.residual = a.dt_omega + a.advection + a.damping - (a.shear + a.induction + phi_sum);

  const VolumeField divb = div_phi(g, gm, mid.b);
  a.div_b_norm = norm0(g, divb);
  a.div_b_defect = -(p.bbar1 * dphi2(g, gm, divb) - p.bbar2 * dphi1(g, gm, divb));
  if (nl) a.div_b_defect += curl_phi(g, gm, {divb * mid.b.c1, divb * mid.b.c2});

  a.residual_norm = norm0(g, a.residual);
  for (const VolumeField* f : {&a.dt_omega, &a.advection, &a.damping, &a.shear, &a.induction,
                               &a.phi.tilt, &a.phi.surface_motion, &a.phi.cross_transport,
                               &a.phi.lorentz})
    a.largest_term = std::max(a.largest_term, norm0(g, *f));
  const double scale = std::max(a.largest_term, 1e-300);
  a.relative_residual = a.largest_term > 0.0 ? a.residual_norm / scale : 0.0;
  a.relative_corrected =
      a.largest_term > 0.0 ? norm0(g, a.residual - a.div_b_defect) / scale : 0.0;
  return a;
}

DampingOracle isolated_damping(const Grid& g, const Params& p, const VolumeField& omega0,
                               double t_end, double dt, const VectorVolumeField* v) {
  if (!(dt > 0.0) || !(t_end >= 0.0))
    throw std::invalid_argument("isolated_damping: need dt > 0 and t_end >= 0");
  const long n = std::lround(t_end / dt);
  if (std::abs(n * dt - t_end) > 1e-9 * std::max(1.0, t_end))
    throw std::invalid_argument("isolated_damping: t_end must be a whole number of steps");
  const double c = damping_coefficient(p);
  auto rhs = [&](const VolumeField& w) {
    VolumeField out = -c * w;
    if (v) out -= v->c1 * ddx1(g, w) + v->c2 * ddx2(g, w);
    return out;
  };
  VolumeField w = omega0;
  for (long i = 0; i < n; ++i) {
    const VolumeField k1 = rhs(w);
    const VolumeField k2 = rhs(w + 0.5 * dt * k1);
    const VolumeField k3 = rhs(w + 0.5 * dt * k2);
    const VolumeField k4 = rhs(w + dt * k3);
    w += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  DampingOracle out;
  out.norm0 = norm0(g, omega0);
  out.norm_t = norm0(g, w);
  out.observed = out.norm0 > 0.0 ? out.norm_t / out.norm0 : 0.0;
  out.expected = std::exp(-c * n * dt);
  out.relative_error = std::abs(out.observed - out.expected) / out.expected;
  return out;
}

}  // namespace fbmhd
