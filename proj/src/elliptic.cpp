#include "fbmhd/elliptic.hpp"

#include "fbmhd/errors.hpp"

#include <Eigen/LU>

#include <cmath>
#include <sstream>

namespace fbmhd {

struct EllipticSolver::Factor {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  bool bordered = false;
};

EllipticSolver::EllipticSolver(const Grid& g, double tol_compat) : grid_(g), tol_compat_(tol_compat) {}

std::shared_ptr<const EllipticSolver::Factor> EllipticSolver::factor(int k, EllipticOp op, double c,
                                                                     BcKind top,
                                                                     BcKind bottom) const {
  k = std::abs(k);
  const Key key{k, static_cast<int>(op), c, static_cast<int>(top), static_cast<int>(bottom)};
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }

  const int nz = grid_.nz();
  const int n = nz - 1;
  const double k2 = wavenumber(k) * wavenumber(k);
  const bool bordered = op == EllipticOp::poisson && k == 0 && top == BcKind::neumann &&
                        bottom == BcKind::neumann;
  const int size = bordered ? nz + 1 : nz;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(size, size);
  for (int i = 1; i < n; ++i) {
    if (op == EllipticOp::poisson) {
      a.row(i).head(nz) = grid_.d2().row(i);
      a(i, i) -= k2;
    } else {
      a.row(i).head(nz) = -grid_.d2().row(i);
      a(i, i) += c + k2;
    }
  }
  auto boundary_row = [&](int i, BcKind kind) {
    if (kind == BcKind::dirichlet)
      a(i, i) = 1.0;
    else
      a.row(i).head(nz) = grid_.d1().row(i);
  };
  boundary_row(0, top);
  boundary_row(n, bottom);
  if (bordered) {
    // interior rows carry a multiplier that absorbs the constant defect;
    // the extra row fixes the mean
    for (int i = 1; i < n; ++i) a(i, nz) = 1.0;
    a.row(nz).head(nz) = grid_.weights_x2().transpose();
  }

  auto f = std::make_shared<Factor>();
  f->lu.compute(a);
  f->bordered = bordered;
  const double rc = f->lu.rcond();
  if (!(rc > 1e-15)) {
    std::ostringstream msg;
    msg << "mode solve singular: k=" << k << " rcond=" << rc;
    throw SingularSystem(msg.str());
  }
  std::lock_guard<std::mutex> lock(mu_);
  cache_.emplace(key, f);
  return f;
}

Eigen::VectorXcd EllipticSolver::solve_rows(int k, EllipticOp op, double c, BcKind top,
                                            BcKind bottom, const Eigen::VectorXcd& b) const {
  const auto f = factor(k, op, c, top, bottom);
  const int nz = grid_.nz();
  if (!f->bordered) {
    Eigen::MatrixXd rhs(nz, 2);
    rhs.col(0) = b.real();
    rhs.col(1) = b.imag();
    const Eigen::MatrixXd x = f->lu.solve(rhs);
    Eigen::VectorXcd out(nz);
    out.real() = x.col(0);
    out.imag() = x.col(1);
    return out;
  }
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nz + 1, 2);
  rhs.col(0).head(nz) = b.real();
  rhs.col(1).head(nz) = b.imag();
  const Eigen::MatrixXd x = f->lu.solve(rhs);
  Eigen::VectorXcd out(nz);
  out.real() = x.col(0).head(nz);
  out.imag() = x.col(1).head(nz);
  return out;
}

FourierModes EllipticSolver::solve_all(EllipticOp op, double c, BcKind top, BcKind bottom,
                                       const FourierModes& rhs) const {
  FourierModes out(rhs.rows(), rhs.cols());
  for (int m = 0; m < rhs.rows(); ++m)
    out.row(m) = solve_rows(m, op, c, top, bottom, rhs.row(m).transpose()).transpose();
  return out;
}

namespace {

double compatibility_defect(const Grid& g, const Eigen::VectorXcd& rhs, std::complex<double> top,
                            std::complex<double> bottom, double* scale) {
  const Eigen::VectorXd& w = g.weights_x2();
  std::complex<double> integral = 0.0;
  double mag = 0.0;
  for (int j = 0; j < g.nz(); ++j) {
    integral += w(j) * rhs(j);
    mag += w(j) * std::abs(rhs(j));
  }
  *scale = std::max(1.0, mag + std::abs(top) + std::abs(bottom));
  return std::abs(integral - (top - bottom));
}

bool pure_neumann(int k, EllipticOp op, BcKind top, BcKind bottom) {
  return k == 0 && op == EllipticOp::poisson && top == BcKind::neumann && bottom == BcKind::neumann;
}

}  // namespace

ModeSolution EllipticSolver::solve_mode(const ModeSolveSpec& spec) const {
  const int nz = grid_.nz();
  if (spec.rhs.size() != nz) throw std::invalid_argument("solve_mode: rhs must have nz entries");
  if (spec.op == EllipticOp::helmholtz && spec.c < 0.0)
    throw std::invalid_argument("solve_mode: helmholtz shift must be nonnegative");
  ModeSolution sol;
  if (pure_neumann(spec.k, spec.op, spec.top.kind, spec.bottom.kind)) {
    double scale = 1.0;
    sol.compat_residual = compatibility_defect(grid_, spec.rhs, spec.top.value, spec.bottom.value, &scale);
    if (sol.compat_residual > tol_compat_ * scale) {
      std::ostringstream msg;
      msg << "k=0 Neumann data incompatible: residual " << sol.compat_residual;
      throw CompatibilityViolation(msg.str(), sol.compat_residual);
    }
  }
  Eigen::VectorXcd b = spec.rhs;
  b(0) = spec.top.value;
  b(nz - 1) = spec.bottom.value;
  sol.u = solve_rows(spec.k, spec.op, spec.c, spec.top.kind, spec.bottom.kind, b);
  return sol;
}

namespace {

/// Shared driver for the field-level solves: rhs per mode with boundary
/// rows replaced by the surface/bottom data.
VolumeField solve_field(const EllipticSolver& s, EllipticOp op, double c, BcKind top, BcKind bottom,
                        const VolumeField& rhs, const SurfaceField* top_data,
                        const SurfaceField* bottom_data, double* compat) {
  const Grid& g = s.grid();
  const int nz = g.nz();
  const FourierModes r = g.forward(rhs);
  SurfaceModes tb = SurfaceModes::Zero(g.num_modes());
  SurfaceModes bb = SurfaceModes::Zero(g.num_modes());
  if (top_data) tb = g.forward(*top_data);
  if (bottom_data) bb = g.forward(*bottom_data);
  FourierModes out(g.num_modes(), nz);
  for (int m = 0; m < g.num_modes(); ++m) {
    Eigen::VectorXcd b = r.row(m).transpose();
    if (compat && m == 0 && pure_neumann(0, op, top, bottom)) {
      double scale = 1.0;
      *compat = compatibility_defect(g, b, tb(0), bb(0), &scale);
      if (*compat > s.tol_compat() * scale) {
        std::ostringstream msg;
        msg << "k=0 Neumann data incompatible: residual " << *compat;
        throw CompatibilityViolation(msg.str(), *compat);
      }
    }
    b(0) = tb(m);
    b(nz - 1) = bb(m);
    out.row(m) = s.solve_rows(m, op, c, top, bottom, b).transpose();
  }
  return g.inverse(out);
}

}  // namespace

VolumeField solve_pressure_dirichlet(const EllipticSolver& s, const VolumeField& rhs,
                                     const SurfaceField& top, const SurfaceField* bottom_flux) {
  return solve_field(s, EllipticOp::poisson, 0.0, BcKind::dirichlet, BcKind::neumann, rhs, &top,
                     bottom_flux, nullptr);
}

NeumannSolution solve_pressure_neumann(const EllipticSolver& s, const VolumeField& rhs,
                                       const SurfaceField& top_flux,
                                       const SurfaceField* bottom_flux) {
  NeumannSolution sol;
  sol.u = solve_field(s, EllipticOp::poisson, 0.0, BcKind::neumann, BcKind::neumann, rhs, &top_flux,
                      bottom_flux, &sol.compat_residual);
  return sol;
}

VolumeField solve_helmholtz_dirichlet(const EllipticSolver& s, double c, const VolumeField& rhs) {
  return solve_field(s, EllipticOp::helmholtz, c, BcKind::dirichlet, BcKind::dirichlet, rhs, nullptr,
                     nullptr, nullptr);
}

VolumeField flat_div(const Grid& g, const VectorVolumeField& v) {
  return ddx1(g, v.c1) + ddx2(g, v.c2);
}

VolumeField flat_curl(const Grid& g, const VectorVolumeField& v) {
  return ddx1(g, v.c2) - ddx2(g, v.c1);
}

VectorVolumeField projection_repair(const EllipticSolver& s, const VectorVolumeField& v,
                                    const VolumeField& target_div) {
  const Grid& g = s.grid();
  const VolumeField defect = flat_div(g, v) - target_div;
  const SurfaceField zero = g.surface_zeros();
  const VolumeField chi = solve_pressure_dirichlet(s, defect, zero, nullptr);
  VectorVolumeField out{v.c1 - ddx1(g, chi), v.c2 - ddx2(g, chi)};
  // the bottom row is untouched analytically; keep it bit-identical
  out.c2.col(g.nz() - 1) = v.c2.col(g.nz() - 1);
  return out;
}

VectorVolumeField hodge_recover(const EllipticSolver& s, const VolumeField& curl,
                                const VolumeField& div, const SurfaceField& top_v2) {
  const Grid& g = s.grid();
  const VolumeField psi = solve_field(s, EllipticOp::poisson, 0.0, BcKind::dirichlet,
                                      BcKind::dirichlet, curl, nullptr, nullptr, nullptr);
  const NeumannSolution chi = solve_pressure_neumann(s, div, top_v2, nullptr);
  return {-ddx2(g, psi) + ddx1(g, chi.u), ddx1(g, psi) + ddx2(g, chi.u)};
}

}  // namespace fbmhd
