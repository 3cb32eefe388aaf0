#include "fbmhd/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace fbmhd {

namespace {

constexpr int kMaxNormOrder = 4;

// FFTW planning is not thread safe; execution with the new-array
// interface is. FFTW_ESTIMATE keeps the chosen algorithm, and with it
// every rounding, identical from run to run.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

constexpr unsigned kPlanFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;

}  // namespace

struct Grid::Plans {
  fftw_plan vol_fwd = nullptr;
  fftw_plan vol_inv = nullptr;
  fftw_plan srf_fwd = nullptr;
  fftw_plan srf_inv = nullptr;

  Plans(int nx, int nz) {
    const int nm = nx / 2 + 1;
    int n[1] = {nx};
    std::vector<double> r(static_cast<size_t>(nx) * nz);
    std::vector<std::complex<double>> c(static_cast<size_t>(nm) * nz);
    auto* cc = reinterpret_cast<fftw_complex*>(c.data());
    std::lock_guard<std::mutex> lock(plan_mutex());
    vol_fwd = fftw_plan_many_dft_r2c(1, n, nz, r.data(), nullptr, 1, nx, cc, nullptr, 1, nm, kPlanFlags);
    vol_inv = fftw_plan_many_dft_c2r(1, n, nz, cc, nullptr, 1, nm, r.data(), nullptr, 1, nx, kPlanFlags);
    srf_fwd = fftw_plan_dft_r2c_1d(nx, r.data(), cc, kPlanFlags);
    srf_inv = fftw_plan_dft_c2r_1d(nx, cc, r.data(), kPlanFlags);
    if (!vol_fwd || !vol_inv || !srf_fwd || !srf_inv) throw std::runtime_error("grid: FFT planning failed");
  }
  ~Plans() {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(vol_fwd);
    fftw_destroy_plan(vol_inv);
    fftw_destroy_plan(srf_fwd);
    fftw_destroy_plan(srf_inv);
  }
  Plans(const Plans&) = delete;
  Plans& operator=(const Plans&) = delete;
};

Grid::Grid(int nx, int nz, double dealias_fraction)
    : nx_(nx), nz_(nz), dealias_fraction_(dealias_fraction) {
  if (nx < 8 || nx % 2 != 0)
    throw std::invalid_argument("grid: nx must be even and >= 8, got " + std::to_string(nx));
  if (nz < 8) throw std::invalid_argument("grid: nz must be >= 8, got " + std::to_string(nz));
  if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0))
    throw std::invalid_argument("grid: dealias_fraction must lie in (0, 1]");

  const int n = nz - 1;
  const double pi = EIGEN_PI;
  x1_.resize(nx);
  for (int i = 0; i < nx; ++i) x1_(i) = static_cast<double>(i) / nx;

  // sin form keeps the reference nodes symmetric to rounding
  Eigen::VectorXd xi(nz);
  for (int j = 0; j <= n; ++j) xi(j) = std::sin(pi * (n - 2.0 * j) / (2.0 * n));
  x2_ = (xi.array() - 1.0) / 2.0;
  x2_(0) = 0.0;
  x2_(n) = -1.0;

  Eigen::VectorXd c = Eigen::VectorXd::Ones(nz);
  c(0) = 2.0;
  c(n) = 2.0;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(nz, nz);
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      if (i == j) continue;
      const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      d(i, j) = (c(i) / c(j)) * sign / (xi(i) - xi(j));
    }
    d(i, i) = -d.row(i).sum();
  }
  d1_ = 2.0 * d;
  d2_ = d1_ * d1_;

  // Clenshaw-Curtis on [-1, 1], halved for the unit-depth strip
  wz_ = Eigen::VectorXd::Zero(nz);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n - 1);
  auto theta = [&](int j) { return pi * j / n; };
  if (n % 2 == 0) {
    wz_(0) = wz_(n) = 1.0 / (n * n - 1.0);
    for (int k = 1; k < n / 2; ++k)
      for (int j = 1; j < n; ++j) v(j - 1) -= 2.0 * std::cos(2.0 * k * theta(j)) / (4.0 * k * k - 1.0);
    for (int j = 1; j < n; ++j) v(j - 1) -= std::cos(n * theta(j)) / (n * n - 1.0);
  } else {
    wz_(0) = wz_(n) = 1.0 / (static_cast<double>(n) * n);
    for (int k = 1; k <= (n - 1) / 2; ++k)
      for (int j = 1; j < n; ++j) v(j - 1) -= 2.0 * std::cos(2.0 * k * theta(j)) / (4.0 * k * k - 1.0);
  }
  for (int j = 1; j < n; ++j) wz_(j) = 2.0 * v(j - 1) / n;
  wz_ *= 0.5;

  cf_.resize(nz, nz);
  ci_.resize(nz, nz);
  for (int k = 0; k <= n; ++k) {
    for (int j = 0; j <= n; ++j) {
      const double ck = std::cos(k * theta(j));
      ci_(j, k) = ck;
      cf_(k, j) = 2.0 / (n * c(k) * c(j)) * ck;
    }
  }
  plans_ = std::make_shared<const Plans>(nx, nz);
}

int Grid::fourier_cutoff() const {
  return static_cast<int>(std::floor(dealias_fraction_ * nx_ / 2.0 + 1e-12));
}

int Grid::cheb_cutoff() const {
  return static_cast<int>(std::floor(dealias_fraction_ * nz_ + 1e-12));
}

FourierModes Grid::forward(const VolumeField& f) const {
  FourierModes out(num_modes(), nz_);
  // r2c out of place leaves the input intact
  fftw_execute_dft_r2c(plans_->vol_fwd, const_cast<double*>(f.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
  out *= 1.0 / nx_;
  return out;
}

VolumeField Grid::inverse(const FourierModes& c) const {
  FourierModes work = c;  // c2r overwrites its input
  VolumeField out(nx_, nz_);
  fftw_execute_dft_c2r(plans_->vol_inv, reinterpret_cast<fftw_complex*>(work.data()), out.data());
  return out;
}

SurfaceModes Grid::forward(const SurfaceField& h) const {
  SurfaceModes out(num_modes());
  fftw_execute_dft_r2c(plans_->srf_fwd, const_cast<double*>(h.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
  out *= 1.0 / nx_;
  return out;
}

SurfaceField Grid::inverse(const SurfaceModes& c) const {
  SurfaceModes work = c;
  SurfaceField out(nx_);
  fftw_execute_dft_c2r(plans_->srf_inv, reinterpret_cast<fftw_complex*>(work.data()), out.data());
  return out;
}

VolumeField ddx1(const Grid& g, const VolumeField& f) {
  FourierModes c = g.forward(f);
  const int nyq = g.nx() / 2;
  for (int m = 0; m < g.num_modes(); ++m) {
    const std::complex<double> mult = (m == nyq) ? 0.0 : std::complex<double>(0.0, wavenumber(m));
    c.row(m) *= mult;
  }
  return g.inverse(c);
}

SurfaceField ddx1(const Grid& g, const SurfaceField& h) {
  SurfaceModes c = g.forward(h);
  const int nyq = g.nx() / 2;
  for (int m = 0; m < g.num_modes(); ++m)
    c(m) *= (m == nyq) ? 0.0 : std::complex<double>(0.0, wavenumber(m));
  return g.inverse(c);
}

VolumeField ddx2(const Grid& g, const VolumeField& f) {
  return (f.matrix() * g.d1().transpose()).array();
}

double integrate_volume(const Grid& g, const VolumeField& f) {
  return (f.matrix() * g.weights_x2()).sum() * g.weight_x1();
}

double integrate_surface(const Grid& g, const SurfaceField& h) { return h.sum() * g.weight_x1(); }

double surface_norm(const Grid& g, const SurfaceField& h, double s) {
  const SurfaceModes c = g.forward(h);
  const int nyq = g.nx() / 2;
  double acc = 0.0;
  for (int m = 0; m < g.num_modes(); ++m) {
    const double mult = std::pow(1.0 + wavenumber(m) * wavenumber(m), s);
    // interior modes stand for the pair +-m
    const double count = (m == 0 || m == nyq) ? 1.0 : 2.0;
    acc += count * mult * std::norm(c(m));
  }
  return std::sqrt(acc);
}

double l2_squared(const Grid& g, const VolumeField& f) { return integrate_volume(g, f.square()); }

double volume_norm(const Grid& g, const VolumeField& f, int m) {
  if (m < 0 || m > kMaxNormOrder)
    throw std::domain_error("volume_norm: order exceeds the cap of 4");
  double acc = 0.0;
  VolumeField row = f;  // d1^a f
  for (int a = 0; a <= m; ++a) {
    VolumeField col = row;  // d1^a d2^c f
    for (int c = 0; a + c <= m; ++c) {
      acc += l2_squared(g, col);
      if (a + c < m) col = ddx2(g, col);
    }
    if (a < m) row = ddx1(g, row);
  }
  return std::sqrt(acc);
}

double anisotropic_norm(const Grid& g, const VolumeField& f, int m, int l) {
  if (m < 0 || l < 0 || m + l > kMaxNormOrder)
    throw std::domain_error("anisotropic_norm: m + l exceeds the cap of 4");
  double acc = 0.0;
  VolumeField d = f;
  for (int j = 0; j <= l; ++j) {
    acc += volume_norm(g, d, m);
    if (j < l) d = ddx1(g, d);
  }
  return acc;
}

VolumeField dealias_x1(const Grid& g, const VolumeField& f) {
  FourierModes c = g.forward(f);
  const int cut = g.fourier_cutoff();
  for (int m = cut + 1; m < g.num_modes(); ++m) c.row(m).setZero();
  if (g.nx() / 2 <= cut) c.row(g.nx() / 2).setZero();  // Nyquist never survives
  return g.inverse(c);
}

VolumeField dealias(const Grid& g, const VolumeField& f) {
  VolumeField fx = dealias_x1(g, f);
  Eigen::MatrixXd coef = fx.matrix() * g.cheb_forward().transpose();
  const int cut = g.cheb_cutoff();
  for (int k = cut + 1; k < g.nz(); ++k) coef.col(k).setZero();
  return (coef * g.cheb_inverse().transpose()).array();
}

SurfaceField dealias(const Grid& g, const SurfaceField& h) {
  SurfaceModes c = g.forward(h);
  const int cut = g.fourier_cutoff();
  for (int m = cut + 1; m < g.num_modes(); ++m) c(m) = 0.0;
  c(g.nx() / 2) = 0.0;
  return g.inverse(c);
}

}  // namespace fbmhd
