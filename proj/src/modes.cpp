#include "fbmhd/modes.hpp"

#include "fbmhd/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace fbmhd {

namespace {

using Cd = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;

}  // namespace

ModeOperator assemble(int k, const Params& p, int nz) {
  if (k == 0) throw ConfigError("modes: k = 0 is not part of the pencil");
  p.validate(true);
  const Grid cg(8, nz);
  const MatrixXd& d = cg.d1();
  const MatrixXd& d2 = cg.d2();
  const int n = nz - 1;
  const double kp = wavenumber(k);
  const Cd ik(0.0, kp);

  ModeOperator op;
  op.k = k;
  op.nz = nz;
  op.params = p;
  const int size = op.size();
  MatrixXcd a = MatrixXcd::Zero(size, size);

  // Bbar . grad on one column of nodes
  const MatrixXcd grad_b = Cd(0.0, p.bbar1 * kp) * MatrixXcd::Identity(nz, nz) +
                           p.bbar2 * d.cast<Cd>();

  // pressure: (D^2 - k'^2) q = i k' F1 + D F2 inside, q = (g + sigma k'^2) h
  // on the surface, D q = F2 on the bottom; F = Bbar . grad b
  MatrixXd m = MatrixXd::Zero(nz, nz);
  for (int i = 1; i < n; ++i) {
    m.row(i) = d2.row(i);
    m(i, i) -= kp * kp;
  }
  m(0, 0) = 1.0;
  m.row(n) = d.row(n);
  MatrixXcd r = MatrixXcd::Zero(nz, size);
  const MatrixXcd d_grad_b = d.cast<Cd>() * grad_b;
  for (int i = 1; i < n; ++i) {
    r.block(i, op.b1(0), 1, nz) = ik * grad_b.row(i);
    r.block(i, op.b2(0), 1, nz) = d_grad_b.row(i);
  }
  r(0, op.h()) = p.g + p.sigma * kp * kp;
  r.block(n, op.b2(0), 1, nz) = grad_b.row(n);
  const MatrixXcd q = m.partialPivLu().solve(MatrixXd::Identity(nz, nz)).cast<Cd>() * r;

  a.block(op.v1(0), op.b1(0), nz, nz) += grad_b;
  a.middleRows(op.v1(0), nz) -= ik * q;
  a.block(op.v2(0), op.b2(0), nz, nz) += grad_b;
  a.middleRows(op.v2(0), nz) -= d.cast<Cd>() * q;

  // induction on interior rows; wall values are pinned by constraints
  MatrixXcd heat = (p.kappa * (d2 - kp * kp * MatrixXd::Identity(nz, nz))).cast<Cd>();
  for (int c = 0; c < 2; ++c) {
    const int bo = c == 0 ? op.b1(0) : op.b2(0);
    const int vo = c == 0 ? op.v1(0) : op.v2(0);
    a.block(bo + 1, vo, n - 1, nz) = grad_b.middleRows(1, n - 1);
    a.block(bo + 1, bo + 1, n - 1, n - 1) = heat.block(1, 1, n - 1, n - 1);
  }
  a(op.h(), op.v2(0)) = 1.0;
  op.a_full = a;

  const int nc = (n - 1) + 1 + 4;
  MatrixXcd c = MatrixXcd::Zero(nc, size);
  int row = 0;
  for (int i = 1; i < n; ++i, ++row) {
    c(row, op.v1(i)) = ik;
    c.block(row, op.v2(0), 1, nz) = d.row(i).cast<Cd>();
  }
  c(row++, op.v2(n)) = 1.0;
  c(row++, op.b1(0)) = 1.0;
  c(row++, op.b1(n)) = 1.0;
  c(row++, op.b2(0)) = 1.0;
  c(row++, op.b2(n)) = 1.0;
  op.c = c;

  Eigen::HouseholderQR<MatrixXcd> qr(c.adjoint());
  const MatrixXcd qfull = qr.householderQ() * MatrixXcd::Identity(size, size);
  const MatrixXcd rr = qr.matrixQR().topRows(nc).triangularView<Eigen::Upper>();
  double rmax = 0.0, rmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < nc; ++i) {
    rmax = std::max(rmax, std::abs(rr(i, i)));
    rmin = std::min(rmin, std::abs(rr(i, i)));
  }
  if (!(rmin > 1e-12 * rmax)) throw SingularSystem("modes: constraint rows are rank deficient");
  op.z = qfull.rightCols(size - nc);
  const MatrixXcd az = a * op.z;
  op.a_reduced = op.z.adjoint() * az;
  op.invariance_defect = (az - op.z * op.a_reduced).norm() / std::max(1.0, az.norm());
  if (op.invariance_defect > 1e-8)
    throw SingularSystem("modes: generator does not preserve the constraint set");

  op.pencil_a = MatrixXcd::Zero(size, size);
  op.pencil_e = MatrixXcd::Zero(size, size);
  op.pencil_a.topRows(size - nc) = op.z.adjoint() * a;
  op.pencil_a.bottomRows(nc) = c;
  op.pencil_e.topRows(size - nc) = op.z.adjoint();
  for (int i = size - nc; i < size; ++i) op.constraint_rows.push_back(i);
  return op;
}

bool pencil_regular(const ModeOperator& op) {
  PortableRng rng(0x5eed);
  for (int trial = 0; trial < 2; ++trial) {
    const Cd lambda(3.0 * rng.uniform(), 3.0 * rng.uniform());
    Eigen::FullPivLU<MatrixXcd> lu(op.pencil_a - lambda * op.pencil_e);
    if (lu.rank() < op.size()) return false;
  }
  return true;
}

const char* branch_name(Branch b) {
  switch (b) {
    case Branch::magnetic: return "magnetic";
    case Branch::wave: return "wave";
    case Branch::vortical: return "vortical";
    case Branch::spurious: return "spurious";
  }
  return "?";
}

double mode_energy(const ModeOperator& op, const VectorXcd& x) {
  const Grid cg(8, op.nz);
  const Eigen::VectorXd& w = cg.weights_x2();
  const double kp = wavenumber(op.k);
  double e = 0.0;
  for (int j = 0; j < op.nz; ++j)
    e += w(j) * (std::norm(x(op.v1(j))) + std::norm(x(op.v2(j))) + std::norm(x(op.b1(j))) +
                 std::norm(x(op.b2(j))));
  return e + (op.params.g + op.params.sigma * kp * kp) * std::norm(x(op.h()));
}

Spectrum spectrum(const ModeOperator& op, const SpectrumOptions& opts) {
  Eigen::ComplexEigenSolver<MatrixXcd> es(op.a_reduced, true);
  if (es.info() != Eigen::Success) throw NoConvergence("modes: eigen solver failed");
  const Grid cg(8, op.nz);
  const Eigen::VectorXd& w = cg.weights_x2();
  const int cut = cg.cheb_cutoff() + 1;
  const double kp = wavenumber(op.k);
  const double surf = op.params.g + op.params.sigma * kp * kp;

  Spectrum s;
  s.k = op.k;
  s.abscissa = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    Eigenpair e;
    e.lambda = es.eigenvalues()(i);
    const VectorXcd x = op.z * es.eigenvectors().col(i);
    const double xn = x.norm();
    e.residual = (op.a_full * x - e.lambda * x).norm() / (xn * std::max(1.0, std::abs(e.lambda)));

    double ev = 0.0, eb = 0.0;
    for (int j = 0; j < op.nz; ++j) {
      ev += w(j) * (std::norm(x(op.v1(j))) + std::norm(x(op.v2(j))));
      eb += w(j) * (std::norm(x(op.b1(j))) + std::norm(x(op.b2(j))));
    }
    const double eh = surf * std::norm(x(op.h()));
    const double et = std::max(ev + eb + eh, 1e-300);
    e.frac_v = ev / et;
    e.frac_b = eb / et;
    e.frac_h = eh / et;

    double head = 0.0, tail = 0.0;
    for (int c = 0; c < 4; ++c) {
      const VectorXcd coef = cg.cheb_forward().cast<Cd>() * x.segment(c * op.nz, op.nz);
      for (int j = 0; j < op.nz; ++j) (j < cut ? head : tail) += std::norm(coef(j));
    }
    e.tail = tail / std::max(head + tail, 1e-300);

    const bool bad = !std::isfinite(e.lambda.real()) || !std::isfinite(e.lambda.imag()) ||
                     std::abs(e.lambda) > opts.cutoff || e.residual > opts.residual_tol ||
                     e.tail > opts.tail_tol;
    if (bad)
      e.branch = Branch::spurious;
    else if (e.frac_h >= 0.1)
      e.branch = Branch::wave;
    else if (e.frac_b >= e.frac_v)
      e.branch = Branch::magnetic;
    else
      e.branch = Branch::vortical;
    if (e.branch == Branch::spurious)
      ++s.spurious;
    else
      s.abscissa = std::max(s.abscissa, e.lambda.real());
    if (opts.keep_vectors) e.x = x;
    s.pairs.push_back(std::move(e));
  }
  return s;
}

AbscissaScan spectral_abscissa(const Params& p, int k_max, int nz, const SpectrumOptions& opts) {
  if (k_max < 1) throw ConfigError("modes: k_max must be at least 1");
  AbscissaScan scan;
  scan.global = -std::numeric_limits<double>::infinity();
  for (int k = 1; k <= k_max; ++k) {
    const Spectrum s = spectrum(assemble(k, p, nz), opts);
    scan.per_k.push_back({k, s.abscissa});
    if (s.abscissa > scan.global) {
      scan.global = s.abscissa;
      scan.k_max_at = k;
    }
  }
  return scan;
}

double constraint_violation(const ModeOperator& op, const VectorXcd& x) {
  const double xn = x.norm();
  return xn > 0.0 ? (op.c * x).norm() / xn : 0.0;
}

VectorXcd constrain(const ModeOperator& op, const VectorXcd& x) {
  return op.z * (op.z.adjoint() * x);
}

VectorXcd random_mode_data(const ModeOperator& op, std::uint64_t seed) {
  const int nz = op.nz;
  const Grid cg(8, nz);
  PortableRng rng(seed);
  const MatrixXcd inv = cg.cheb_inverse().cast<Cd>();
  auto profile = [&] {
    VectorXcd co = VectorXcd::Zero(nz);
    for (int d = 0; d <= cg.cheb_cutoff() / 2; ++d) co(d) = Cd(rng.uniform(), rng.uniform()) / (1.0 + d);
    return VectorXcd(inv * co);
  };
  VectorXcd psi = profile();
  psi.array() -= psi(nz - 1);
  const VectorXcd dpsi = cg.d1().cast<Cd>() * psi;
  const Cd ik(0.0, wavenumber(op.k));
  VectorXcd x = VectorXcd::Zero(op.size());
  for (int j = 0; j < nz; ++j) {
    x(op.v1(j)) = -dpsi(j);
    x(op.v2(j)) = ik * psi(j);
  }
  for (int c = 0; c < 2; ++c) {
    const VectorXcd b = profile();
    for (int j = 0; j < nz; ++j) {
      const double z = cg.x2()(j);
      x(c == 0 ? op.b1(j) : op.b2(j)) = b(j) * z * (1.0 + z);
    }
  }
  x(op.h()) = Cd(rng.uniform(), rng.uniform());
  return x;
}

VectorXcd evolve_mode(const ModeOperator& op, const VectorXcd& x0, double t) {
  if (x0.size() != op.size()) throw std::invalid_argument("evolve_mode: wrong vector length");
  if (constraint_violation(op, x0) > 1e-10)
    throw std::invalid_argument("evolve_mode: initial vector violates the constraints");
  const MatrixXcd e = (t * op.a_reduced).exp();
  return op.z * (e * (op.z.adjoint() * x0));
}

VectorXcd extract_mode(const Grid& g, const State& s, int k) {
  const int m = std::abs(k);
  if (m == 0 || m > g.nx() / 2 - 1) throw std::invalid_argument("extract_mode: k out of range");
  const int nz = g.nz();
  VectorXcd x(4 * nz + 1);
  const VolumeField* f[4] = {&s.v.c1, &s.v.c2, &s.b.c1, &s.b.c2};
  for (int c = 0; c < 4; ++c) {
    const FourierModes fh = g.forward(*f[c]);
    for (int j = 0; j < nz; ++j) x(c * nz + j) = k > 0 ? fh(m, j) : std::conj(fh(m, j));
  }
  const SurfaceModes hh = g.forward(s.h);
  x(4 * nz) = k > 0 ? hh(m) : std::conj(hh(m));
  return x;
}

State mode_state(const Grid& g, const ModeOperator& op, const VectorXcd& x) {
  const int m = std::abs(op.k);
  if (g.nz() != op.nz || m > g.nx() / 2 - 1)
    throw std::invalid_argument("mode_state: grid does not resolve the mode");
  State s = zero_state(g);
  VolumeField* f[4] = {&s.v.c1, &s.v.c2, &s.b.c1, &s.b.c2};
  for (int c = 0; c < 4; ++c) {
    FourierModes fh = FourierModes::Zero(g.num_modes(), g.nz());
    for (int j = 0; j < g.nz(); ++j) {
      const Cd v = x(c * op.nz + j);
      fh(m, j) = op.k > 0 ? v : std::conj(v);
    }
    *f[c] = g.inverse(fh);
  }
  SurfaceModes hh = SurfaceModes::Zero(g.num_modes());
  hh(m) = op.k > 0 ? x(op.h()) : std::conj(x(op.h()));
  s.h = g.inverse(hh);
  return s;
}

void write_spectrum_csv(std::ostream& os, const std::vector<Spectrum>& spectra) {
  os << "k,re,im,branch,residual\n";
  char buf[160];
  for (const Spectrum& s : spectra)
    for (const Eigenpair& e : s.pairs) {
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%s,%.17g\n", s.k, e.lambda.real(),
                    e.lambda.imag(), branch_name(e.branch), e.residual);
      os << buf;
    }
}

}  // namespace fbmhd
