#include "fbmhd/dynamics.hpp"

#include "fbmhd/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <array>
#include <cmath>
#include <sstream>

namespace fbmhd {

void Params::validate(bool allow_zero_kappa) const {
  auto finite = [](double x) { return std::isfinite(x); };
  if (!finite(g) || g <= 0.0) throw ConfigError("params: g must be positive");
  if (!finite(sigma) || sigma <= 0.0) throw ConfigError("params: sigma must be positive");
  if (!finite(kappa) || kappa < 0.0 || (kappa == 0.0 && !allow_zero_kappa))
    throw ConfigError(allow_zero_kappa ? "params: kappa must be nonnegative"
                                       : "params: kappa must be positive");
  if (!finite(bbar1) || !finite(bbar2)) throw ConfigError("params: bbar must be finite");
}

double stability_bound(const Grid& g, const Params& p, double c_cfl) {
  const double kx = EIGEN_PI * g.nx();
  return c_cfl / std::sqrt(p.sigma * kx * kx * kx + p.g * kx);
}

State zero_state(const Grid& g) {
  State s;
  s.v = {g.zeros(), g.zeros()};
  s.b = {g.zeros(), g.zeros()};
  s.h = g.surface_zeros();
  s.q = g.zeros();
  s.geo = flat_geometry(g);
  return s;
}

// Flat diffusion operator L = kappa (D2 - k'^2) on interior nodes, one
// matrix family per Fourier mode. The exponential and phi functions come
// from the exponential of an augmented block matrix, whose first block row
// is [e^A, phi1(A), phi2(A), phi3(A)]. Stages follow Krogstad's variant,
// which keeps its accuracy when the forcing does not vanish at the walls.
class DiffusionPropagator {
 public:
  enum Which { kE, kE2, kQ, kQ2, kP1, kP2, kF1, kF2, kF3, kCN, kCount };

  DiffusionPropagator(const Grid& g, double kappa, double dt, Scheme scheme) : nz_(g.nz()) {
    const int n = g.nz() - 2;
    const Eigen::MatrixXd d2 = g.d2().block(1, 1, n, n);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    mats_.resize(g.num_modes());
    for (int m = 0; m < g.num_modes(); ++m) {
      const double k2 = wavenumber(m) * wavenumber(m);
      const Eigen::MatrixXd l = kappa * (d2 - k2 * id);
      auto& mm = mats_[m];
      if (scheme == Scheme::etdrk4) {
        Eigen::MatrixXd w = Eigen::MatrixXd::Zero(4 * n, 4 * n);
        w.block(0, 0, n, n) = dt * l;
        w.block(0, n, n, n) = id;
        w.block(n, 2 * n, n, n) = id;
        w.block(2 * n, 3 * n, n, n) = id;
        const Eigen::MatrixXd x = w.exp();
        const Eigen::MatrixXd p1 = x.block(0, n, n, n);
        const Eigen::MatrixXd p2 = x.block(0, 2 * n, n, n);
        const Eigen::MatrixXd p3 = x.block(0, 3 * n, n, n);
        mm[kE] = x.block(0, 0, n, n);
        mm[kP1] = dt * p1;
        mm[kP2] = 2.0 * dt * p2;
        mm[kF1] = dt * (p1 - 3.0 * p2 + 4.0 * p3);
        mm[kF2] = dt * (p2 - 2.0 * p3);
        mm[kF3] = dt * (4.0 * p3 - p2);
        Eigen::MatrixXd w2 = Eigen::MatrixXd::Zero(3 * n, 3 * n);
        w2.block(0, 0, n, n) = 0.5 * dt * l;
        w2.block(0, n, n, n) = id;
        w2.block(n, 2 * n, n, n) = id;
        const Eigen::MatrixXd x2 = w2.exp();
        mm[kE2] = x2.block(0, 0, n, n);
        mm[kQ] = 0.5 * dt * x2.block(0, n, n, n);
        mm[kQ2] = dt * x2.block(0, 2 * n, n, n);
      } else {
        const double tau = scheme == Scheme::rk4_cn ? 0.25 * dt : 0.5 * dt;
        mm[kCN] = (id - tau * l).partialPivLu().solve(id + tau * l);
      }
    }
  }

  /// Applies the selected matrix to the interior of every mode; wall rows
  /// of the result are zero.
  FourierModes apply(Which w, const FourierModes& in) const {
    const int n = nz_ - 2;
    FourierModes out = FourierModes::Zero(in.rows(), in.cols());
    Eigen::MatrixXd ri(n, 2);
    for (int m = 0; m < in.rows(); ++m) {
      ri.col(0) = in.row(m).segment(1, n).real().transpose();
      ri.col(1) = in.row(m).segment(1, n).imag().transpose();
      const Eigen::MatrixXd ro = mats_[m][w] * ri;
      for (int i = 0; i < n; ++i) out(m, i + 1) = {ro(i, 0), ro(i, 1)};
    }
    return out;
  }

 private:
  int nz_;
  std::vector<std::array<Eigen::MatrixXd, kCount>> mats_;
};

namespace {

VolumeField flat_laplacian(const Grid& g, const VolumeField& f) {
  return ddx1(g, ddx1(g, f)) + ddx2(g, ddx2(g, f));
}

void zero_walls(const Grid& g, VolumeField& f) {
  f.col(0).setZero();
  f.col(g.nz() - 1).setZero();
}

VectorVolumeField axpy(const VectorVolumeField& x, double a, const VectorVolumeField& y) {
  return {x.c1 + a * y.c1, x.c2 + a * y.c2};
}

}  // namespace

Stepper::Stepper(const Grid& g, const Params& p, const StepConfig& cfg)
    : grid_(g), params_(p), cfg_(cfg), solver_(g), flat_geo_(flat_geometry(g)) {
  p.validate(cfg.mode == Mode::linear);
  if (!(cfg.dt > 0.0)) throw ConfigError("step: dt must be positive");
  const double bound = stability_bound(g, p, cfg.c_cfl);
  if (cfg.dt > bound) {
    std::ostringstream msg;
    msg << "step: dt = " << cfg.dt << " exceeds the capillary stability bound " << bound
        << " for nx = " << g.nx();
    throw ConfigError(msg.str());
  }
  prop_ = std::make_unique<DiffusionPropagator>(g, p.kappa, cfg.dt, cfg.scheme);
}

Stepper::~Stepper() = default;

VectorVolumeField Stepper::flat_diffusion(const VectorVolumeField& b) const {
  VectorVolumeField out{params_.kappa * flat_laplacian(grid_, b.c1),
                        params_.kappa * flat_laplacian(grid_, b.c2)};
  zero_walls(grid_, out.c1);
  zero_walls(grid_, out.c2);
  return out;
}

VolumeField Stepper::solve_pressure(const Geometry& geo, const VectorVolumeField& force,
                                    const SurfaceField& top, const VolumeField* guess,
                                    int* iterations) const {
  const Grid& g = grid_;
  const int nz = g.nz();
  const VolumeField rhs = div_phi(g, geo, force);
  // d2 q = j F2 on the bottom keeps the normal velocity there at rest
  const SurfaceModes top_hat = g.forward(SurfaceField(top));
  const SurfaceModes flux_hat = g.forward(SurfaceField(bottom_row(geo.j) * bottom_row(force.c2)));
  auto solve = [&](const VolumeField& r) {
    FourierModes b = g.forward(r);
    b.col(0) = top_hat;
    b.col(nz - 1) = flux_hat;
    return solver_.solve_all(EllipticOp::poisson, 0.0, BcKind::dirichlet, BcKind::neumann, b);
  };
  if (geo.flat) {
    if (iterations) *iterations = 1;
    return g.inverse(solve(rhs));
  }

  // (Delta - Delta^phi) q evaluated from the Fourier coefficients of q
  const VolumeField a = geo.deta1 * geo.inv_j;
  const int nyq = g.nx() / 2;
  auto correction = [&](const FourierModes& qh) {
    FourierModes q1h = qh;
    FourierModes q11h = qh;
    for (int m = 0; m < g.num_modes(); ++m) {
      const double k = m == nyq ? 0.0 : wavenumber(m);
      q1h.row(m) *= std::complex<double>(0.0, k);
      q11h.row(m) *= -k * k;
    }
    const VolumeField q2 = ddx2(g, g.inverse(qh));
    const VolumeField g1 = g.inverse(q1h) - a * q2;
    const VolumeField lap_phi = ddx1(g, g1) - a * ddx2(g, g1) + geo.inv_j * ddx2(g, geo.inv_j * q2);
    return VolumeField(g.inverse(q11h) + ddx2(g, q2) - lap_phi);
  };

  const Eigen::Index len = 2 * g.num_modes() * nz;
  auto flat = [len](const FourierModes& c) {
    return Eigen::Map<const Eigen::VectorXd>(reinterpret_cast<const double*>(c.data()), len);
  };
  const bool have_guess = guess && guess->rows() == g.nx() && guess->cols() == nz;
  FourierModes x = have_guess ? g.forward(*guess) : solve(rhs);
  // Anderson mixing over the last few iterates of the fixed-point map
  constexpr int kDepth = 3;
  std::vector<Eigen::VectorXd> dfs, dgs;
  Eigen::VectorXd f_prev, g_prev;
  for (int it = 1; it <= cfg_.pressure_max_iter; ++it) {
    const FourierModes gx = solve(rhs + correction(x));
    const Eigen::VectorXd gv = flat(gx);
    const Eigen::VectorXd f = gv - flat(x);
    const double scale = gv.cwiseAbs().maxCoeff();
    const double diff = f.cwiseAbs().maxCoeff();
    if (diff <= cfg_.pressure_tol * scale || diff == 0.0) {
      if (iterations) *iterations = it;
      return g.inverse(gx);
    }
    if (f_prev.size() > 0) {
      dfs.push_back(f - f_prev);
      dgs.push_back(gv - g_prev);
      if (static_cast<int>(dfs.size()) > kDepth) {
        dfs.erase(dfs.begin());
        dgs.erase(dgs.begin());
      }
    }
    f_prev = f;
    g_prev = gv;
    Eigen::VectorXd next = gv;
    if (!dfs.empty()) {
      Eigen::MatrixXd df(len, dfs.size());
      Eigen::MatrixXd dg(len, dgs.size());
      for (size_t i = 0; i < dfs.size(); ++i) {
        df.col(i) = dfs[i];
        dg.col(i) = dgs[i];
      }
      const Eigen::VectorXd gamma = df.colPivHouseholderQr().solve(f);
      next -= dg * gamma;
    }
    x = FourierModes(g.num_modes(), nz);
    Eigen::Map<Eigen::VectorXd>(reinterpret_cast<double*>(x.data()), len) = next;
  }
  throw NoConvergence("pressure fixed point did not converge in " +
                      std::to_string(cfg_.pressure_max_iter) + " iterations");
}

Tendency Stepper::tendency(const State& s, Mode mode) const {
  return mode == Mode::linear ? tendency_linear(s) : tendency_nonlinear(s);
}

Tendency Stepper::tendency_linear(const State& s) const {
  const Grid& g = grid_;
  const Params& p = params_;
  Tendency t;
  t.geo = flat_geo_;
  t.dh = top_row(s.v.c2);
  const VectorVolumeField gb1{ddx1(g, s.b.c1), ddx2(g, s.b.c1)};
  const VectorVolumeField gb2{ddx1(g, s.b.c2), ddx2(g, s.b.c2)};
  const VectorVolumeField force{p.bbar1 * gb1.c1 + p.bbar2 * gb1.c2,
                                p.bbar1 * gb2.c1 + p.bbar2 * gb2.c2};
  const SurfaceField top = p.g * s.h - p.sigma * ddx1(g, ddx1(g, s.h));
  t.q = solve_pressure(t.geo, force, top, nullptr, &t.pressure_iterations);
  t.dv = {force.c1 - ddx1(g, t.q), force.c2 - ddx2(g, t.q)};
  t.db = {p.bbar1 * ddx1(g, s.v.c1) + p.bbar2 * ddx2(g, s.v.c1),
          p.bbar1 * ddx1(g, s.v.c2) + p.bbar2 * ddx2(g, s.v.c2)};
  zero_walls(g, t.db.c1);
  zero_walls(g, t.db.c2);
  return t;
}

Tendency Stepper::tendency_nonlinear(const State& s) const {
  const Grid& g = grid_;
  const Params& p = params_;
  auto trunc = [&](VolumeField f) { return cfg_.dealias ? dealias_x1(g, f) : f; };
  Tendency t;
  SurfaceField dh = top_row(s.v.c2) - top_row(s.v.c1) * ddx1(g, s.h);
  t.dh = cfg_.dealias ? dealias(g, dh) : dh;
  t.geo = build_geometry(g, s.h, t.dh, cfg_.j_min);
  const Geometry& geo = t.geo;

  const VectorVolumeField gv1 = grad_phi(g, geo, s.v.c1);
  const VectorVolumeField gv2 = grad_phi(g, geo, s.v.c2);
  const VectorVolumeField gb1 = grad_phi(g, geo, s.b.c1);
  const VectorVolumeField gb2 = grad_phi(g, geo, s.b.c2);
  const VolumeField divb = gb1.c1 + gb2.c2;
  const VolumeField big_b1 = p.bbar1 + s.b.c1;
  const VolumeField big_b2 = p.bbar2 + s.b.c2;

  // conservative Lorentz density: (Bbar + b).grad b + (div b) b
  const VectorVolumeField force{
      -(s.v.c1 * gv1.c1 + s.v.c2 * gv1.c2) + big_b1 * gb1.c1 + big_b2 * gb1.c2 + divb * s.b.c1,
      -(s.v.c1 * gv2.c1 + s.v.c2 * gv2.c2) + big_b1 * gb2.c1 + big_b2 * gb2.c2 + divb * s.b.c2};
  const SurfaceField top = p.g * s.h - p.sigma * mean_curvature(g, s.h, cfg_.dealias);
  t.q = solve_pressure(geo, force, top, &s.q, &t.pressure_iterations);
  const VectorVolumeField gq = grad_phi(g, geo, t.q);
  t.dv = {trunc(force.c1 - gq.c1 + geo.dt_eta * gv1.c2),
          trunc(force.c2 - gq.c2 + geo.dt_eta * gv2.c2)};

  auto induction = [&](const VolumeField& b, const VectorVolumeField& gb,
                       const VectorVolumeField& gv) {
    const VolumeField lap_phi = dphi1(g, geo, gb.c1) + dphi2(g, geo, gb.c2);
    VolumeField out = geo.dt_eta * gb.c2 - (s.v.c1 * gb.c1 + s.v.c2 * gb.c2) +
                      big_b1 * gv.c1 + big_b2 * gv.c2 +
                      p.kappa * (lap_phi - flat_laplacian(g, b));
    out = trunc(out);
    zero_walls(g, out);
    return out;
  };
  t.db = {induction(s.b.c1, gb1, gv1), induction(s.b.c2, gb2, gv2)};
  return t;
}

Stepper::Rates Stepper::as_rates(const Tendency& t) { return {t.dv, t.db, t.dh}; }

Stepper::Rates Stepper::rates(const State& s, VolumeField* q_out) const {
  Tendency t = tendency(s);
  if (q_out) *q_out = std::move(t.q);
  return {std::move(t.dv), std::move(t.db), std::move(t.dh)};
}

State Stepper::step(const State& s, const Tendency* first) const {
  State out;
  switch (cfg_.scheme) {
    case Scheme::etdrk4:
      out = step_etdrk4(s, first ? as_rates(*first) : rates(s, nullptr));
      break;
    case Scheme::rk4_cn:
      out = step_rk4_cn(s);
      break;
    case Scheme::euler_cn:
      out = step_euler_cn(s, first ? as_rates(*first) : rates(s, nullptr));
      break;
  }
  out.t = s.t + cfg_.dt;
  enforce_constraints(out);
  return out;
}

State Stepper::step_etdrk4(const State& s, const Rates& nu) const {
  using P = DiffusionPropagator;
  const Grid& g = grid_;
  const double dt = cfg_.dt;
  const P& pr = *prop_;
  auto fwd = [&](const VectorVolumeField& f) {
    return std::array<FourierModes, 2>{g.forward(f.c1), g.forward(f.c2)};
  };
  auto inv = [&](const std::array<FourierModes, 2>& c) {
    return VectorVolumeField{g.inverse(c[0]), g.inverse(c[1])};
  };

  const auto bh = fwd(s.b);
  const auto nuh = fwd(nu.db);
  std::array<FourierModes, 2> e2b;
  for (int c = 0; c < 2; ++c) e2b[c] = pr.apply(P::kE2, bh[c]);

  State a = s;
  a.v = axpy(s.v, 0.5 * dt, nu.dv);
  a.h = s.h + 0.5 * dt * nu.dh;
  std::array<FourierModes, 2> abh;
  for (int c = 0; c < 2; ++c) abh[c] = e2b[c] + pr.apply(P::kQ, nuh[c]);
  a.b = inv(abh);
  const Rates na = rates(a, &a.q);
  const auto nah = fwd(na.db);

  State bs = s;
  bs.q = a.q;
  bs.v = axpy(s.v, 0.5 * dt, na.dv);
  bs.h = s.h + 0.5 * dt * na.dh;
  std::array<FourierModes, 2> bbh;
  for (int c = 0; c < 2; ++c)
    bbh[c] = abh[c] + pr.apply(P::kQ2, nah[c] - nuh[c]);
  bs.b = inv(bbh);
  const Rates nb = rates(bs, &bs.q);
  const auto nbh = fwd(nb.db);

  State cs = s;
  cs.q = bs.q;
  cs.v = {a.v.c1 + 0.5 * dt * (2.0 * nb.dv.c1 - nu.dv.c1),
          a.v.c2 + 0.5 * dt * (2.0 * nb.dv.c2 - nu.dv.c2)};
  cs.h = a.h + 0.5 * dt * (2.0 * nb.dh - nu.dh);
  std::array<FourierModes, 2> cbh;
  for (int c = 0; c < 2; ++c)
    cbh[c] = pr.apply(P::kE, bh[c]) + pr.apply(P::kP1, nuh[c]) + pr.apply(P::kP2, nbh[c] - nuh[c]);
  cs.b = inv(cbh);
  const Rates nc = rates(cs, &cs.q);
  const auto nch = fwd(nc.db);

  State out = s;
  out.q = cs.q;
  const double w = dt / 6.0;
  out.v = {s.v.c1 + w * (nu.dv.c1 + 2.0 * na.dv.c1 + 2.0 * nb.dv.c1 + nc.dv.c1),
           s.v.c2 + w * (nu.dv.c2 + 2.0 * na.dv.c2 + 2.0 * nb.dv.c2 + nc.dv.c2)};
  out.h = s.h + w * (nu.dh + 2.0 * na.dh + 2.0 * nb.dh + nc.dh);
  std::array<FourierModes, 2> obh;
  for (int c = 0; c < 2; ++c)
    obh[c] = pr.apply(P::kE, bh[c]) + pr.apply(P::kF1, nuh[c]) +
             2.0 * pr.apply(P::kF2, nah[c] + nbh[c]) + pr.apply(P::kF3, nch[c]);
  out.b = inv(obh);
  return out;
}

State Stepper::step_rk4_cn(const State& s) const {
  using P = DiffusionPropagator;
  const Grid& g = grid_;
  const double dt = cfg_.dt;
  auto cn = [&](const VectorVolumeField& b) {
    return VectorVolumeField{g.inverse(prop_->apply(P::kCN, g.forward(b.c1))),
                             g.inverse(prop_->apply(P::kCN, g.forward(b.c2)))};
  };
  State u = s;
  u.b = cn(s.b);
  auto stage = [&](const State& base, const Rates& r, double c) {
    State x = base;
    x.v = axpy(base.v, c, r.dv);
    x.b = axpy(base.b, c, r.db);
    x.h = base.h + c * r.dh;
    return x;
  };
  const Rates k1 = rates(u, &u.q);
  State a = stage(u, k1, 0.5 * dt);
  const Rates k2 = rates(a, &a.q);
  State b = stage(u, k2, 0.5 * dt);
  b.q = a.q;
  const Rates k3 = rates(b, &b.q);
  State c = stage(u, k3, dt);
  c.q = b.q;
  const Rates k4 = rates(c, &c.q);
  const double w = dt / 6.0;
  State out = u;
  out.q = c.q;
  out.v = {u.v.c1 + w * (k1.dv.c1 + 2.0 * k2.dv.c1 + 2.0 * k3.dv.c1 + k4.dv.c1),
           u.v.c2 + w * (k1.dv.c2 + 2.0 * k2.dv.c2 + 2.0 * k3.dv.c2 + k4.dv.c2)};
  out.b = {u.b.c1 + w * (k1.db.c1 + 2.0 * k2.db.c1 + 2.0 * k3.db.c1 + k4.db.c1),
           u.b.c2 + w * (k1.db.c2 + 2.0 * k2.db.c2 + 2.0 * k3.db.c2 + k4.db.c2)};
  out.h = u.h + w * (k1.dh + 2.0 * k2.dh + 2.0 * k3.dh + k4.dh);
  out.b = cn(out.b);
  return out;
}

State Stepper::step_euler_cn(const State& s, const Rates& nu) const {
  using P = DiffusionPropagator;
  const Grid& g = grid_;
  const double dt = cfg_.dt;
  State out = s;
  out.v = axpy(s.v, dt, nu.dv);
  out.h = s.h + dt * nu.dh;
  const VectorVolumeField b = axpy(s.b, dt, nu.db);
  out.b = {g.inverse(prop_->apply(P::kCN, g.forward(b.c1))),
           g.inverse(prop_->apply(P::kCN, g.forward(b.c2)))};
  return out;
}

void Stepper::enforce_constraints(State& s) const {
  const Grid& g = grid_;
  const int bot = g.nz() - 1;
  zero_walls(g, s.b.c1);
  zero_walls(g, s.b.c2);
  s.v.c2.col(bot).setZero();

  if (cfg_.mode == Mode::linear) {
    s.v = projection_repair(solver_, s.v, g.zeros());
    // the k = 0 part of v2 is slaved to zero by the flux constraint
    for (int j = 0; j < g.nz(); ++j) s.v.c2.col(j) -= s.v.c2.col(j).mean();
    s.geo = flat_geo_;
    return;
  }

  Geometry geo = build_geometry(g, s.h, g.surface_zeros(), cfg_.j_min);
  for (int pass = 0; pass < 3; ++pass) {
    const VolumeField target = geo.deta1 * dphi2(g, geo, s.v.c1) + geo.deta2 * dphi2(g, geo, s.v.c2);
    s.v = projection_repair(solver_, s.v, target);
    const double res = div_phi(g, geo, s.v).abs().maxCoeff();
    const double scale = std::max(1e-300, s.v.c1.abs().maxCoeff() + s.v.c2.abs().maxCoeff());
    if (res <= 1e-13 * scale) break;
  }
  // mean flux through every level: mean(v2 - d1 eta v1) = 0
  for (int j = 0; j < g.nz(); ++j) {
    const double want = (geo.deta1.col(j) * s.v.c1.col(j)).mean();
    s.v.c2.col(j) += want - s.v.c2.col(j).mean();
  }
  s.v.c2.col(bot).setZero();
  s.geo = std::move(geo);
}

void Stepper::refresh(State& s, bool keep_pressure) const {
  Tendency t = tendency(s);
  if (!keep_pressure) s.q = std::move(t.q);
  s.geo = std::move(t.geo);
}

GTerms compute_G(const Stepper& st, const State& s) {
  const Grid& g = st.grid();
  const Params& p = st.params();
  const bool dl = st.config().dealias;
  auto trunc = [&](VolumeField f) { return dl ? dealias_x1(g, f) : f; };
  const Tendency t = st.tendency(s, Mode::nonlinear);
  const Geometry& geo = t.geo;

  const VectorVolumeField gv1 = grad_phi(g, geo, s.v.c1);
  const VectorVolumeField gv2 = grad_phi(g, geo, s.v.c2);
  const VectorVolumeField gb1 = grad_phi(g, geo, s.b.c1);
  const VectorVolumeField gb2 = grad_phi(g, geo, s.b.c2);
  const VolumeField d2q = dphi2(g, geo, t.q);
  const VolumeField bbar_grad_eta = p.bbar1 * geo.deta1 + p.bbar2 * geo.deta2;

  GTerms out;
  out.g1.c1 = trunc(geo.dt_eta * gv1.c2 + geo.deta1 * d2q - bbar_grad_eta * gb1.c2 -
                    (s.v.c1 * gv1.c1 + s.v.c2 * gv1.c2) + (s.b.c1 * gb1.c1 + s.b.c2 * gb1.c2));
  out.g1.c2 = trunc(geo.dt_eta * gv2.c2 + geo.deta2 * d2q - bbar_grad_eta * gb2.c2 -
                    (s.v.c1 * gv2.c1 + s.v.c2 * gv2.c2) + (s.b.c1 * gb2.c1 + s.b.c2 * gb2.c2));
  out.g2 = trunc(geo.deta1 * gv1.c2 + geo.deta2 * gv2.c2);
  auto g3 = [&](const VolumeField& b, const VectorVolumeField& gb, const VectorVolumeField& gv) {
    const VolumeField lap_phi = dphi1(g, geo, gb.c1) + dphi2(g, geo, gb.c2);
    const VolumeField lap = ddx1(g, ddx1(g, b)) + ddx2(g, ddx2(g, b));
    return trunc(geo.dt_eta * gb.c2 - bbar_grad_eta * gv.c2 + p.kappa * (lap_phi - lap) -
                 (s.v.c1 * gb.c1 + s.v.c2 * gb.c2) + (s.b.c1 * gv.c1 + s.b.c2 * gv.c2));
  };
  out.g3 = {g3(s.b.c1, gb1, gv1), g3(s.b.c2, gb2, gv2)};
  out.g4 = trunc(geo.deta1 * gb1.c2 + geo.deta2 * gb2.c2);
  SurfaceField g5 = -top_row(s.v.c1) * ddx1(g, s.h);
  out.g5 = dl ? dealias(g, g5) : g5;
  out.g6 = g6_term(g, s.h, p.sigma, dl);
  return out;
}

VolumeField pressure_from_state(const Stepper& st, const State& s) { return st.tendency(s).q; }

ExplicitRhs rhs_explicit(const Stepper& st, const State& s) {
  Tendency t = st.tendency(s);
  return {std::move(t.dv), std::move(t.dh)};
}

VectorVolumeField diffuse_b_implicit(const Stepper& st, const VectorVolumeField& b,
                                     const VectorVolumeField& v, double dt,
                                     const VectorVolumeField* g3) {
  if (!(dt > 0.0)) throw std::invalid_argument("diffuse_b_implicit: dt must be positive");
  const Grid& g = st.grid();
  const Params& p = st.params();
  auto one = [&](const VolumeField& bc, const VolumeField& vc, const VolumeField* gc) {
    VolumeField forcing = p.bbar1 * ddx1(g, vc) + p.bbar2 * ddx2(g, vc);
    if (gc) forcing += *gc;
    VolumeField out;
    if (p.kappa == 0.0) {
      out = bc + dt * forcing;
    } else {
      const double c = 2.0 / (p.kappa * dt);
      const VolumeField rhs = c * bc + flat_laplacian(g, bc) + (2.0 / p.kappa) * forcing;
      out = solve_helmholtz_dirichlet(st.solver(), c, rhs);
    }
    zero_walls(g, out);
    return out;
  };
  return {one(b.c1, v.c1, g3 ? &g3->c1 : nullptr), one(b.c2, v.c2, g3 ? &g3->c2 : nullptr)};
}

State make_initial_data(const Stepper& st, const InitSpec& spec) {
  const Grid& g = st.grid();
  if (!(spec.amplitude >= 0.0) || !std::isfinite(spec.amplitude))
    throw ConfigError("init: amplitude must be a nonnegative number");
  for (int k : spec.h_modes)
    if (k < 1 || k > g.fourier_cutoff()) throw ConfigError("init: h mode outside the resolved band");
  for (int k : spec.v_modes)
    if (k < 1 || k > g.fourier_cutoff()) throw ConfigError("init: v mode outside the resolved band");

  State s = zero_state(g);
  if (spec.amplitude == 0.0) {
    st.refresh(s);
    return s;
  }
  PortableRng rng(spec.seed);
  const double tau = 2.0 * EIGEN_PI;

  SurfaceField h = g.surface_zeros();
  for (int k : spec.h_modes) {
    const double a = rng.uniform();
    const double b = rng.uniform();
    h += g.sample_surface([&](double x) { return a * std::cos(tau * k * x) + b * std::sin(tau * k * x); });
  }
  if (h.abs().maxCoeff() > 0.0) h *= spec.amplitude / h.abs().maxCoeff();
  h -= h.mean();
  s.h = h;
  const bool nonlinear = st.config().mode == Mode::nonlinear;
  const Geometry geo =
      nonlinear ? build_geometry(g, h, g.surface_zeros(), st.config().j_min) : flat_geometry(g);

  // streamfunction with psi = 0 on the bottom
  VolumeField psi = g.zeros();
  for (int k : spec.v_modes) {
    const double al = rng.uniform();
    const double be = rng.uniform();
    const double cc = rng.uniform();
    const double ss = rng.uniform();
    psi += g.sample([&](double x1, double x2) {
      return (1.0 + x2) * (al + be * x2) * (cc * std::cos(tau * k * x1) + ss * std::sin(tau * k * x1));
    });
  }
  // flux (-d2 psi, d1 psi) pulled back through the flattening map
  const VolumeField u1 = -ddx2(g, psi);
  const VolumeField u2 = ddx1(g, psi);
  VectorVolumeField v{u1 * geo.inv_j, g.zeros()};
  v.c2 = u2 + geo.deta1 * v.c1;
  const double vmax = std::max(v.c1.abs().maxCoeff(), v.c2.abs().maxCoeff());
  if (vmax > 0.0) {
    v.c1 *= spec.amplitude / vmax;
    v.c2 *= spec.amplitude / vmax;
  }
  s.v = v;

  if (!spec.b_zero) {
    VolumeField bump = g.zeros();
    for (int k : spec.v_modes) {
      const double a = rng.uniform();
      const double b = rng.uniform();
      bump += g.sample([&](double x1, double x2) {
        return -4.0 * x2 * (1.0 + x2) * (a * std::cos(tau * k * x1) + b * std::sin(tau * k * x1));
      });
    }
    s.b.c1 = spec.amplitude * bump;
    s.b.c2 = spec.amplitude * ddx1(g, bump) / tau;
  }

  st.enforce_constraints(s);
  // zero mean momentum: the flux correction leaves constants untouched
  const double m = integrate_volume(g, s.v.c1 * s.geo.j) / integrate_volume(g, s.geo.j);
  s.v.c1 -= m;
  st.refresh(s);
  return s;
}

}  // namespace fbmhd
