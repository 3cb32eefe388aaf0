#pragma once

#include <Eigen/Dense>

#include <complex>
#include <memory>

namespace fbmhd {

/// Node values on the strip. Row i is x1 = i/nx, column j is the j-th
/// Chebyshev-Gauss-Lobatto node (column 0 is the surface x2 = 0, column
/// nz-1 the bottom x2 = -1).
using VolumeField = Eigen::ArrayXXd;
using SurfaceField = Eigen::ArrayXd;

/// Half-spectrum Fourier coefficients in x1: row m holds wavenumber m,
/// m = 0..nx/2, normalized so that f(x1) = sum over the Hermitian extension.
using FourierModes = Eigen::ArrayXXcd;
using SurfaceModes = Eigen::ArrayXcd;

struct VectorVolumeField {
  VolumeField c1;
  VolumeField c2;
};

class Grid {
 public:
  Grid(int nx, int nz, double dealias_fraction = 2.0 / 3.0);

  int nx() const { return nx_; }
  int nz() const { return nz_; }
  int num_modes() const { return nx_ / 2 + 1; }
  double dealias_fraction() const { return dealias_fraction_; }

  const Eigen::VectorXd& x1() const { return x1_; }
  const Eigen::VectorXd& x2() const { return x2_; }
  /// Clenshaw-Curtis weights on [-1, 0]; they sum to 1.
  const Eigen::VectorXd& weights_x2() const { return wz_; }
  double weight_x1() const { return 1.0 / nx_; }

  /// d/dx2 and d2/dx2 collocation matrices on the mapped nodes.
  const Eigen::MatrixXd& d1() const { return d1_; }
  const Eigen::MatrixXd& d2() const { return d2_; }
  /// Node values -> Chebyshev coefficients and back.
  const Eigen::MatrixXd& cheb_forward() const { return cf_; }
  const Eigen::MatrixXd& cheb_inverse() const { return ci_; }

  /// Largest Fourier wavenumber kept by the 2/3-style truncation.
  int fourier_cutoff() const;
  int cheb_cutoff() const;

  VolumeField zeros() const { return VolumeField::Zero(nx_, nz_); }
  SurfaceField surface_zeros() const { return SurfaceField::Zero(nx_); }
  /// Field built from a function of (x1, x2).
  template <class F>
  VolumeField sample(F&& f) const {
    VolumeField out(nx_, nz_);
    for (int j = 0; j < nz_; ++j)
      for (int i = 0; i < nx_; ++i) out(i, j) = f(x1_(i), x2_(j));
    return out;
  }
  template <class F>
  SurfaceField sample_surface(F&& f) const {
    SurfaceField out(nx_);
    for (int i = 0; i < nx_; ++i) out(i) = f(x1_(i));
    return out;
  }

  FourierModes forward(const VolumeField& f) const;
  VolumeField inverse(const FourierModes& c) const;
  SurfaceModes forward(const SurfaceField& h) const;
  SurfaceField inverse(const SurfaceModes& c) const;

  bool same_shape(const Grid& o) const { return nx_ == o.nx_ && nz_ == o.nz_; }

  struct Plans;

 private:
  int nx_;
  int nz_;
  double dealias_fraction_;
  Eigen::VectorXd x1_, x2_, wz_;
  Eigen::MatrixXd d1_, d2_, cf_, ci_;
  std::shared_ptr<const Plans> plans_;
};

/// 2*pi*m for the half-spectrum row m.
inline double wavenumber(int m) { return 2.0 * EIGEN_PI * m; }

VolumeField ddx1(const Grid& g, const VolumeField& f);
SurfaceField ddx1(const Grid& g, const SurfaceField& h);
VolumeField ddx2(const Grid& g, const VolumeField& f);

double integrate_volume(const Grid& g, const VolumeField& f);
double integrate_surface(const Grid& g, const SurfaceField& h);

/// (sum_xi (1 + (2 pi xi)^2)^s |h_xi|^2)^(1/2) over the full spectrum.
double surface_norm(const Grid& g, const SurfaceField& h, double s);
/// Squared L2 norm, flat measure.
double l2_squared(const Grid& g, const VolumeField& f);
double volume_norm(const Grid& g, const VolumeField& f, int m);
double anisotropic_norm(const Grid& g, const VolumeField& f, int m, int l);

/// Truncation in both directions.
VolumeField dealias(const Grid& g, const VolumeField& f);
SurfaceField dealias(const Grid& g, const SurfaceField& h);
/// Fourier truncation only; used on nonlinear products inside the stepper.
VolumeField dealias_x1(const Grid& g, const VolumeField& f);

inline SurfaceField top_row(const VolumeField& f) { return f.col(0); }
inline SurfaceField bottom_row(const VolumeField& f) { return f.col(f.cols() - 1); }

}  // namespace fbmhd
