#pragma once

#include "fbmhd/grid.hpp"

namespace fbmhd {

/// Flattening data for a surface h: eta = (1+x2) P h, phi = x2 + eta,
/// j = d2 phi. All derived fields are fixed at construction.
struct Geometry {
  SurfaceField h;
  SurfaceField dt_h;
  VolumeField eta;
  VolumeField varphi;
  VolumeField j;
  VolumeField inv_j;
  VolumeField deta1;
  VolumeField deta2;
  VolumeField dt_eta;
  bool flat = false;
  /// Whether 1/2 <= j <= 3/2 holds everywhere (the a priori window).
  bool in_bounded_window = true;
};

constexpr double kDefaultJacobianFloor = 0.1;

/// Harmonic extension with kernel exp(2 pi |xi| x2), mode by mode.
VolumeField poisson_extend(const Grid& g, const SurfaceField& h);

Geometry flat_geometry(const Grid& g);
Geometry build_geometry(const Grid& g, const SurfaceField& h, const SurfaceField& dt_h,
                        double j_min = kDefaultJacobianFloor);

enum class Direction { t, x1, x2 };

/// Flattened derivative; dt_f is required for Direction::t.
VolumeField dphi(const Grid& g, const Geometry& geo, const VolumeField& f, Direction dir,
                 const VolumeField* dt_f = nullptr);
VolumeField dphi1(const Grid& g, const Geometry& geo, const VolumeField& f);
VolumeField dphi2(const Grid& g, const Geometry& geo, const VolumeField& f);

VectorVolumeField grad_phi(const Grid& g, const Geometry& geo, const VolumeField& f);
VolumeField div_phi(const Grid& g, const Geometry& geo, const VectorVolumeField& v);
VolumeField curl_phi(const Grid& g, const Geometry& geo, const VectorVolumeField& v);
VolumeField laplace_phi(const Grid& g, const Geometry& geo, const VolumeField& f);

/// (a . grad^phi) f for a given vector field a.
VolumeField advect_phi(const Grid& g, const Geometry& geo, const VectorVolumeField& a,
                       const VolumeField& f);

struct NormalField {
  SurfaceField n1;
  SurfaceField n2;
};

NormalField normal(const Grid& g, const SurfaceField& h);
/// d1(h' / sqrt(1 + h'^2)).
SurfaceField mean_curvature(const Grid& g, const SurfaceField& h, bool dealiased = true);
/// -sigma d1(((1 + h'^2)^(-1/2) - 1) h').
SurfaceField g6_term(const Grid& g, const SurfaceField& h, double sigma, bool dealiased = true);

}  // namespace fbmhd
