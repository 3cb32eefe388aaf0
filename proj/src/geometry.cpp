#include "fbmhd/geometry.hpp"

#include "fbmhd/errors.hpp"

#include <cmath>
#include <sstream>

namespace fbmhd {

namespace {

FourierModes extension_modes(const Grid& g, const SurfaceField& h) {
  const SurfaceModes c = g.forward(h);
  FourierModes out(g.num_modes(), g.nz());
  for (int j = 0; j < g.nz(); ++j)
    for (int m = 0; m < g.num_modes(); ++m)
      out(m, j) = c(m) * std::exp(wavenumber(m) * g.x2()(j));
  return out;
}

VolumeField one_plus_x2(const Grid& g) {
  return g.sample([](double, double x2) { return 1.0 + x2; });
}

}  // namespace

VolumeField poisson_extend(const Grid& g, const SurfaceField& h) {
  return g.inverse(extension_modes(g, h));
}

Geometry flat_geometry(const Grid& g) {
  Geometry geo;
  geo.h = g.surface_zeros();
  geo.dt_h = g.surface_zeros();
  geo.eta = g.zeros();
  geo.varphi = g.sample([](double, double x2) { return x2; });
  geo.j = VolumeField::Ones(g.nx(), g.nz());
  geo.inv_j = geo.j;
  geo.deta1 = g.zeros();
  geo.deta2 = g.zeros();
  geo.dt_eta = g.zeros();
  geo.flat = true;
  return geo;
}

Geometry build_geometry(const Grid& g, const SurfaceField& h, const SurfaceField& dt_h,
                        double j_min) {
  Geometry geo;
  const VolumeField w = one_plus_x2(g);
  geo.h = h;
  geo.dt_h = dt_h;
  geo.eta = w * poisson_extend(g, h);
  geo.varphi = geo.eta + g.sample([](double, double x2) { return x2; });
  // collocation derivatives keep d_t j = d2 d_t eta exact at the discrete level
  geo.deta1 = ddx1(g, geo.eta);
  geo.deta2 = ddx2(g, geo.eta);
  geo.j = 1.0 + geo.deta2;
  geo.dt_eta = w * poisson_extend(g, dt_h);
  const double jmin = geo.j.minCoeff();
  if (!(jmin >= j_min)) {
    std::ostringstream msg;
    msg << "flattening map degenerate: min d2 phi = " << jmin << " below floor " << j_min;
    throw DiffeomorphismFailure(msg.str(), jmin);
  }
  geo.in_bounded_window = jmin >= 0.5 && geo.j.maxCoeff() <= 1.5;
  geo.inv_j = geo.j.inverse();
  return geo;
}

VolumeField dphi1(const Grid& g, const Geometry& geo, const VolumeField& f) {
  if (geo.flat) return ddx1(g, f);
  return ddx1(g, f) - geo.deta1 * geo.inv_j * ddx2(g, f);
}

VolumeField dphi2(const Grid& g, const Geometry& geo, const VolumeField& f) {
  if (geo.flat) return ddx2(g, f);
  return geo.inv_j * ddx2(g, f);
}

VolumeField dphi(const Grid& g, const Geometry& geo, const VolumeField& f, Direction dir,
                 const VolumeField* dt_f) {
  switch (dir) {
    case Direction::x1:
      return dphi1(g, geo, f);
    case Direction::x2:
      return dphi2(g, geo, f);
    case Direction::t:
      break;
  }
  if (dt_f == nullptr) throw std::invalid_argument("dphi: time direction needs d_t f");
  return *dt_f - geo.dt_eta * geo.inv_j * ddx2(g, f);
}

VectorVolumeField grad_phi(const Grid& g, const Geometry& geo, const VolumeField& f) {
  const VolumeField f2 = ddx2(g, f);
  if (geo.flat) return {ddx1(g, f), f2};
  return {ddx1(g, f) - geo.deta1 * geo.inv_j * f2, geo.inv_j * f2};
}

VolumeField div_phi(const Grid& g, const Geometry& geo, const VectorVolumeField& v) {
  return dphi1(g, geo, v.c1) + dphi2(g, geo, v.c2);
}

VolumeField curl_phi(const Grid& g, const Geometry& geo, const VectorVolumeField& v) {
  return dphi1(g, geo, v.c2) - dphi2(g, geo, v.c1);
}

VolumeField laplace_phi(const Grid& g, const Geometry& geo, const VolumeField& f) {
  return div_phi(g, geo, grad_phi(g, geo, f));
}

VolumeField advect_phi(const Grid& g, const Geometry& geo, const VectorVolumeField& a,
                       const VolumeField& f) {
  const VectorVolumeField d = grad_phi(g, geo, f);
  return a.c1 * d.c1 + a.c2 * d.c2;
}

NormalField normal(const Grid& g, const SurfaceField& h) {
  return {-ddx1(g, h), SurfaceField::Ones(g.nx())};
}

SurfaceField mean_curvature(const Grid& g, const SurfaceField& h, bool dealiased) {
  const SurfaceField hp = ddx1(g, h);
  SurfaceField s = hp / (1.0 + hp.square()).sqrt();
  if (dealiased) s = dealias(g, s);
  return ddx1(g, s);
}

SurfaceField g6_term(const Grid& g, const SurfaceField& h, double sigma, bool dealiased) {
  const SurfaceField hp = ddx1(g, h);
  SurfaceField s = ((1.0 + hp.square()).rsqrt() - 1.0) * hp;
  if (dealiased) s = dealias(g, s);
  return -sigma * ddx1(g, s);
}

}  // namespace fbmhd
