#pragma once

#include "fbmhd/grid.hpp"

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

namespace fbmhd {

/// poisson: (d2^2 - k'^2) u = rhs.  helmholtz: (c - d2^2 + k'^2) u = rhs.
enum class EllipticOp { poisson, helmholtz };
enum class BcKind { dirichlet, neumann };

struct BoundaryCondition {
  BcKind kind = BcKind::dirichlet;
  std::complex<double> value = 0.0;

  static BoundaryCondition dirichlet(std::complex<double> v) { return {BcKind::dirichlet, v}; }
  static BoundaryCondition neumann(std::complex<double> v) { return {BcKind::neumann, v}; }
};

struct ModeSolveSpec {
  int k = 0;
  EllipticOp op = EllipticOp::poisson;
  double c = 0.0;
  BoundaryCondition top;
  BoundaryCondition bottom;
  /// nz values; entries on the two boundary rows are ignored.
  Eigen::VectorXcd rhs;
};

struct ModeSolution {
  Eigen::VectorXcd u;
  /// Only meaningful for the k = 0 pure Neumann problem.
  double compat_residual = 0.0;
};

/// Dense collocation solver for the two-point problems along x2, one
/// Fourier mode at a time. LU factors are cached per (|k|, op, c, bc kinds)
/// and shared read-only; the cache is the only mutable state and is locked.
class EllipticSolver {
 public:
  explicit EllipticSolver(const Grid& g, double tol_compat = 1e-9);
  EllipticSolver(const EllipticSolver&) = delete;
  EllipticSolver& operator=(const EllipticSolver&) = delete;

  const Grid& grid() const { return grid_; }
  double tol_compat() const { return tol_compat_; }

  ModeSolution solve_mode(const ModeSolveSpec& spec) const;

  /// Raw solve with boundary values already placed in rows 0 and nz-1.
  /// No compatibility check; used by the field-level routines.
  Eigen::VectorXcd solve_rows(int k, EllipticOp op, double c, BcKind top, BcKind bottom,
                              const Eigen::VectorXcd& b) const;

  /// Every Fourier row of rhs solved at once; rows 0 and nz-1 of each
  /// mode already hold the boundary data.
  FourierModes solve_all(EllipticOp op, double c, BcKind top, BcKind bottom,
                         const FourierModes& rhs) const;

 private:
  using Key = std::tuple<int, int, double, int, int>;
  struct Factor;
  std::shared_ptr<const Factor> factor(int k, EllipticOp op, double c, BcKind top,
                                       BcKind bottom) const;

  Grid grid_;
  double tol_compat_;
  mutable std::mutex mu_;
  mutable std::map<Key, std::shared_ptr<const Factor>> cache_;
};

/// Delta q = rhs, q = top on the surface, d2 q = bottom_flux (zero if null)
/// on the bottom.
VolumeField solve_pressure_dirichlet(const EllipticSolver& s, const VolumeField& rhs,
                                     const SurfaceField& top,
                                     const SurfaceField* bottom_flux = nullptr);

struct NeumannSolution {
  VolumeField u;
  double compat_residual = 0.0;
};

/// Delta q = rhs, d2 q = top_flux on the surface, d2 q = bottom_flux on the
/// bottom; the mean-zero representative is returned.
NeumannSolution solve_pressure_neumann(const EllipticSolver& s, const VolumeField& rhs,
                                       const SurfaceField& top_flux,
                                       const SurfaceField* bottom_flux = nullptr);

/// (c - Delta) u = rhs with u = 0 on both walls.
VolumeField solve_helmholtz_dirichlet(const EllipticSolver& s, double c, const VolumeField& rhs);

/// v - grad chi with Delta chi = div v - target_div, chi = 0 on the surface,
/// d2 chi = 0 on the bottom.
VectorVolumeField projection_repair(const EllipticSolver& s, const VectorVolumeField& v,
                                    const VolumeField& target_div);

/// Field with the given curl and divergence, v2 = top_v2 on the surface and
/// v2 = 0 on the bottom; its horizontal mean flow is zero.
VectorVolumeField hodge_recover(const EllipticSolver& s, const VolumeField& curl,
                                const VolumeField& div, const SurfaceField& top_v2);

VolumeField flat_div(const Grid& g, const VectorVolumeField& v);
VolumeField flat_curl(const Grid& g, const VectorVolumeField& v);

}  // namespace fbmhd
