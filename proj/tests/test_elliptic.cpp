#include "fbmhd/elliptic.hpp"
#include "fbmhd/errors.hpp"
#include "fbmhd/lemmas.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace fbmhd;
using oracle::pi;

namespace {

Eigen::VectorXcd profile(const Grid& g, const std::function<double(double)>& f) {
  Eigen::VectorXcd out(g.nz());
  for (int j = 0; j < g.nz(); ++j) out(j) = f(g.x2()(j));
  return out;
}

// u = exp(x2) / (1.2 + x2): analytic on [-1, 0] with a nearby pole, so the
// Chebyshev error is visible at nz = 17 and gone by nz = 33
double mu(double x) { return std::exp(x) / (1.2 + x); }
double mu1(double x) { return mu(x) * (1.0 - 1.0 / (1.2 + x)); }
double mu2(double x) {
  const double r = 1.0 / (1.2 + x);
  return mu(x) * ((1.0 - r) * (1.0 - r) + r * r);
}

double manufactured_error(int nz, EllipticOp op, double c, BcKind top, BcKind bottom) {
  const Grid g(8, nz);
  const EllipticSolver s(g);
  const int k = 1;
  const double kp = 2 * pi * k;
  ModeSolveSpec spec;
  spec.k = k;
  spec.op = op;
  spec.c = c;
  spec.rhs = op == EllipticOp::poisson
                 ? profile(g, [&](double x) { return mu2(x) - kp * kp * mu(x); })
                 : profile(g, [&](double x) { return c * mu(x) - mu2(x) + kp * kp * mu(x); });
  spec.top = top == BcKind::dirichlet ? BoundaryCondition::dirichlet(mu(0.0)) : BoundaryCondition::neumann(mu1(0.0));
  spec.bottom =
      bottom == BcKind::dirichlet ? BoundaryCondition::dirichlet(mu(-1.0)) : BoundaryCondition::neumann(mu1(-1.0));
  const Eigen::VectorXcd u = s.solve_mode(spec).u;
  return (u - profile(g, mu)).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_SUITE("elliptic") {

TEST_CASE("two-point oracles") {
  const Grid g(8, 33);
  const EllipticSolver s(g);
  ModeSolveSpec spec;
  spec.k = 1;
  spec.top = BoundaryCondition::dirichlet(1.0);
  spec.bottom = BoundaryCondition::dirichlet(0.0);
  spec.rhs = Eigen::VectorXcd::Zero(g.nz());
  const Eigen::VectorXcd u = s.solve_mode(spec).u;
  const Eigen::VectorXcd ex = profile(g, [](double x) { return std::sinh(2 * pi * (1 + x)) / std::sinh(2 * pi); });
  CHECK((u - ex).cwiseAbs().maxCoeff() < 1e-9);

  ModeSolveSpec bad;
  bad.k = 0;
  bad.top = BoundaryCondition::neumann(0.0);
  bad.bottom = BoundaryCondition::neumann(0.0);
  bad.rhs = Eigen::VectorXcd::Ones(g.nz());
  CHECK_THROWS_AS(s.solve_mode(bad), CompatibilityViolation);

  // helmholtz, u = (1+x2) x2
  const double c = 0.7, kp = 2 * pi;
  ModeSolveSpec hz;
  hz.k = 1;
  hz.op = EllipticOp::helmholtz;
  hz.c = c;
  hz.rhs = profile(g, [&](double x) { return (c + kp * kp) * (1 + x) * x - 2.0; });
  const Eigen::VectorXcd uh = s.solve_mode(hz).u;
  CHECK((uh - profile(g, [](double x) { return (1 + x) * x; })).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("spectral convergence") {
  using B = BcKind;
  struct Case {
    EllipticOp op;
    double c;
    B top, bottom;
  };
  for (const Case& cs : {Case{EllipticOp::poisson, 0.0, B::dirichlet, B::dirichlet},
                         Case{EllipticOp::poisson, 0.0, B::neumann, B::neumann},
                         Case{EllipticOp::poisson, 0.0, B::dirichlet, B::neumann},
                         Case{EllipticOp::helmholtz, 40.0, B::dirichlet, B::dirichlet}}) {
    const double e17 = manufactured_error(17, cs.op, cs.c, cs.top, cs.bottom);
    const double e33 = manufactured_error(33, cs.op, cs.c, cs.top, cs.bottom);
    CHECK(e17 > 0.0);
    CHECK(e33 <= 1e-3 * e17);
  }
}

TEST_CASE("pressure solves") {
  const Grid g(16, 33);
  const EllipticSolver s(g);
  const double gg = 1.0, sigma = 0.1, kp = 2 * pi;
  const SurfaceField h = g.sample_surface([](double x1) { return std::cos(2 * pi * x1); });
  const SurfaceField top = gg * h - sigma * ddx1(g, ddx1(g, h));
  const VolumeField q = solve_pressure_dirichlet(s, g.zeros(), top);
  const VolumeField ex = g.sample([&](double x1, double x2) {
    return (gg + sigma * kp * kp) * std::cosh(kp * (1 + x2)) / std::cosh(kp) * std::cos(kp * x1);
  });
  CHECK((q - ex).abs().maxCoeff() < 1e-9);
  CHECK(solve_pressure_dirichlet(s, g.zeros(), g.surface_zeros()).abs().maxCoeff() == 0.0);

  // manufactured q* = cos(2 pi x1) cosh(2 pi (x2 + 1)) is harmonic
  const VolumeField qs = g.sample([&](double x1, double x2) { return std::cos(kp * x1) * std::cosh(kp * (x2 + 1)); });
  CHECK((solve_pressure_dirichlet(s, g.zeros(), top_row(qs)) - qs).abs().maxCoeff() < 1e-8);

  const NeumannSolution n = solve_pressure_neumann(s, g.zeros(), h);
  const VolumeField nex = g.sample([&](double x1, double x2) {
    return std::cosh(kp * (x2 + 1)) / (kp * std::sinh(kp)) * std::cos(kp * x1);
  });
  CHECK((n.u - nex).abs().maxCoeff() < 1e-9);
  CHECK(solve_pressure_neumann(s, g.zeros(), g.surface_zeros()).u.abs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(solve_pressure_neumann(s, VolumeField::Ones(16, 33), g.surface_zeros()), CompatibilityViolation);

  // compatible k = 0 data: mean-zero representative
  const VolumeField rhs0 = g.sample([](double, double x2) { return 1.0 + 2.0 * x2; });
  const NeumannSolution n0 = solve_pressure_neumann(s, rhs0, g.surface_zeros());
  CHECK(std::abs(integrate_volume(g, n0.u)) < 1e-12);
}

TEST_CASE("linearity") {
  const Grid g(16, 17);
  const EllipticSolver s(g);
  std::mt19937_64 rng(3);
  const VolumeField x = g.sample(BandLimited(rng, 4, 6)), y = g.sample(BandLimited(rng, 4, 6));
  const SurfaceField tx = top_row(g.sample(BandLimited(rng, 4, 0))), ty = top_row(g.sample(BandLimited(rng, 4, 0)));
  const VolumeField lhs = solve_pressure_dirichlet(s, 2.0 * x - 3.0 * y, 2.0 * tx - 3.0 * ty);
  const VolumeField rhs = 2.0 * solve_pressure_dirichlet(s, x, tx) - 3.0 * solve_pressure_dirichlet(s, y, ty);
  CHECK((lhs - rhs).abs().maxCoeff() < 1e-11 * std::max(1.0, rhs.abs().maxCoeff()));
}

TEST_CASE("projection repair") {
  const Grid g(16, 33);
  const EllipticSolver s(g);
  std::mt19937_64 rng(5);
  VectorVolumeField v{g.sample(BandLimited(rng, 3, 6)), g.sample(BandLimited(rng, 3, 6))};
  v.c2.col(g.nz() - 1).setZero();
  const VectorVolumeField r = projection_repair(s, v, g.zeros());
  // collocation imposes the divergence on interior nodes; the wall rows
  // carry the Dirichlet and Neumann conditions instead
  const VolumeField dr = flat_div(g, r);
  CHECK(dr.middleCols(1, g.nz() - 2).abs().maxCoeff() < 1e-9);
  CHECK((bottom_row(r.c2) - bottom_row(v.c2)).abs().maxCoeff() < 1e-12);

  const VectorVolumeField twice = projection_repair(s, r, g.zeros());
  CHECK((twice.c1 - r.c1).abs().maxCoeff() < 1e-10);
  CHECK((twice.c2 - r.c2).abs().maxCoeff() < 1e-10);

  // chi = 0 on the surface, d2 chi = 0 at the bottom
  const VolumeField chi = g.sample([](double x1, double x2) { return std::sin(2 * pi * x1) * x2 * (x2 + 2.0); });
  const VectorVolumeField grad{ddx1(g, chi), ddx2(g, chi)};
  const VectorVolumeField gone = projection_repair(s, grad, g.zeros());
  CHECK(gone.c1.abs().maxCoeff() < 1e-10);
  CHECK(gone.c2.abs().maxCoeff() < 1e-10);
}

TEST_CASE("hodge recovery") {
  const Grid g(16, 33);
  const EllipticSolver s(g);
  const VectorVolumeField zero = hodge_recover(s, g.zeros(), g.zeros(), g.surface_zeros());
  CHECK(zero.c1.abs().maxCoeff() < 1e-14);
  CHECK(zero.c2.abs().maxCoeff() < 1e-14);

  const VectorVolumeField vs{
      g.sample([](double x1, double x2) { return std::sin(2 * pi * x1) * x2 * x2 + std::cos(4 * pi * x1) * std::exp(x2); }),
      g.sample([](double x1, double x2) { return std::cos(2 * pi * x1) * (1 + x2) * std::cos(x2); })};
  const VectorVolumeField v = hodge_recover(s, flat_curl(g, vs), flat_div(g, vs), top_row(vs.c2));
  // the horizontal mean flow is the kernel; compare after pinning it
  VolumeField d1 = v.c1 - vs.c1;
  d1 -= integrate_volume(g, d1);
  const double err = std::hypot(volume_norm(g, d1, 1), volume_norm(g, v.c2 - vs.c2, 1));
  CHECK(err < 1e-7);
}

}
