#include "fbmhd/errors.hpp"
#include "fbmhd/geometry.hpp"
#include "fbmhd/lemmas.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace fbmhd;
using oracle::pi;

namespace {

SurfaceField random_surface(const Grid& g, std::uint64_t seed, double amp, int modes = 3) {
  std::mt19937_64 rng(seed);
  const BandLimited bl(rng, modes, 0);
  SurfaceField h = amp * g.sample_surface([&](double x1) { return bl.surface(x1); });
  return h - h.mean();
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("harmonic extension") {
  const Grid g(16, 33);
  CHECK(poisson_extend(g, g.surface_zeros()).abs().maxCoeff() == 0.0);

  const SurfaceField c = g.sample_surface([](double x1) { return std::cos(2 * pi * x1); });
  const VolumeField ex = g.sample([](double x1, double x2) { return std::exp(2 * pi * x2) * std::cos(2 * pi * x1); });
  const VolumeField p = poisson_extend(g, c);
  CHECK((p - ex).abs().maxCoeff() < 1e-13);

  const SurfaceField h = random_surface(g, 1, 1.0);
  const VolumeField ph = poisson_extend(g, h);
  CHECK((top_row(ph) - h).abs().maxCoeff() < 1e-12);
  const VolumeField lap = ddx1(g, ddx1(g, ph)) + ddx2(g, ddx2(g, ph));
  CHECK(lap.abs().maxCoeff() < 1e-8);
}

TEST_CASE("build_geometry") {
  const Grid g(16, 33);
  const Geometry flat = build_geometry(g, g.surface_zeros(), g.surface_zeros());
  CHECK(flat.eta.abs().maxCoeff() == 0.0);
  CHECK((flat.j - 1.0).abs().maxCoeff() < 1e-14);
  CHECK((flat.varphi - g.sample([](double, double x2) { return x2; })).abs().maxCoeff() < 1e-15);

  const double eps = 0.01;
  const SurfaceField h = eps * g.sample_surface([](double x1) { return std::cos(2 * pi * x1); });
  const Geometry geo = build_geometry(g, h, g.surface_zeros());
  // d2[(1+x2) e^{2 pi x2}] = e^{2 pi x2}(1 + 2 pi (1+x2))
  const VolumeField j = g.sample([&](double x1, double x2) {
    return 1.0 + eps * std::cos(2 * pi * x1) * std::exp(2 * pi * x2) * (1.0 + 2 * pi * (1.0 + x2));
  });
  CHECK((geo.j - j).abs().maxCoeff() < 1e-11);
  CHECK(geo.j.minCoeff() >= 0.9);
  CHECK(bottom_row(geo.eta).abs().maxCoeff() == 0.0);
  CHECK((top_row(geo.eta) - h).abs().maxCoeff() < 1e-12);

  const SurfaceField big = 0.5 * g.sample_surface([](double x1) { return std::cos(2 * pi * x1); });
  CHECK_THROWS_AS(build_geometry(g, big, g.surface_zeros()), DiffeomorphismFailure);
}

TEST_CASE("flattened derivatives") {
  const Grid g(16, 33);
  std::mt19937_64 rng(2);
  const VolumeField f = g.sample(BandLimited(rng, 3, 5));
  const Geometry flat = flat_geometry(g);
  CHECK((dphi1(g, flat, f) - ddx1(g, f)).abs().maxCoeff() < 1e-13);
  CHECK((dphi2(g, flat, f) - ddx2(g, f)).abs().maxCoeff() < 1e-13);

  const Geometry geo = build_geometry(g, random_surface(g, 4, 0.02), g.surface_zeros());
  CHECK((dphi2(g, geo, geo.varphi) - 1.0).abs().maxCoeff() < 1e-10);
  CHECK(dphi1(g, geo, geo.varphi).abs().maxCoeff() < 1e-10);

  // time direction: d_t^phi phi = 0 as well
  const VolumeField dt_phi = geo.dt_eta;
  CHECK(dphi(g, geo, geo.varphi, Direction::t, &dt_phi).abs().maxCoeff() < 1e-10);
}

TEST_CASE("vector operators") {
  const Grid g(16, 33);
  const Geometry flat = flat_geometry(g);
  // psi vanishes on both walls
  auto psi = [](double x1, double x2) { return std::sin(2 * pi * x1) * std::sin(pi * x2) * (1 + x2); };
  const VolumeField ps = g.sample(psi);
  const VectorVolumeField v{-ddx2(g, ps), ddx1(g, ps)};
  CHECK(div_phi(g, flat, v).abs().maxCoeff() < 1e-9);

  const VolumeField e = g.sample([](double x1, double x2) { return std::exp(2 * pi * x2) * std::cos(2 * pi * x1); });
  CHECK(laplace_phi(g, flat, e).abs().maxCoeff() < 1e-8);

  // the commutator only vanishes once the geometric products are resolved
  const Grid fine(64, 65);
  const Geometry geo = build_geometry(fine, random_surface(fine, 8, 0.01), fine.surface_zeros());
  std::mt19937_64 rng(8);
  const VolumeField f = fine.sample(BandLimited(rng, 3, 5));
  CHECK(curl_phi(fine, geo, grad_phi(fine, geo, f)).abs().maxCoeff() < 1e-8);
}

TEST_CASE("mean curvature") {
  const Grid g(64, 9);
  CHECK(mean_curvature(g, g.surface_zeros()).abs().maxCoeff() == 0.0);

  const double eps = 1e-4;
  const SurfaceField h = eps * g.sample_surface([](double x1) { return std::cos(2 * pi * x1); });
  const SurfaceField lin = -4 * pi * pi * h;
  CHECK((mean_curvature(g, h) - lin).abs().maxCoeff() <= 1e-6 * lin.abs().maxCoeff());

  // pointwise closed form h''/(1+h'^2)^{3/2}
  const Grid fine(128, 9);
  const double a = 0.2;
  const SurfaceField hb = a * fine.sample_surface([](double x1) { return std::cos(2 * pi * x1); });
  const SurfaceField hk = mean_curvature(fine, hb, false);
  for (double x1 : {0.0, 0.125, 0.25}) {
    const double hp = -2 * pi * a * std::sin(2 * pi * x1);
    const double hpp = -4 * pi * pi * a * std::cos(2 * pi * x1);
    const int i = static_cast<int>(std::lround(x1 * 128));
    CHECK(std::abs(hk(i) - hpp / std::pow(1 + hp * hp, 1.5)) < 1e-9);
  }

  const SurfaceField r = random_surface(g, 12, 0.1, 5);
  CHECK(std::abs(integrate_surface(g, mean_curvature(g, r))) < 1e-12);
}

TEST_CASE("normal and G6") {
  const Grid g(64, 9);
  const NormalField n0 = normal(g, g.surface_zeros());
  CHECK(n0.n1.abs().maxCoeff() == 0.0);
  CHECK((n0.n2 - 1.0).abs().maxCoeff() == 0.0);
  CHECK(g6_term(g, g.surface_zeros(), 0.1).abs().maxCoeff() == 0.0);

  const SurfaceField base = g.sample_surface([](double x1) { return std::cos(2 * pi * x1); });
  for (double eps : {1e-2, 5e-3}) {
    const SurfaceField g6 = g6_term(g, eps * base, 1.0);
    CHECK(surface_norm(g, g6, 0.0) <= 10 * eps * eps * eps * std::pow(2 * pi, 4));
  }
  // the cubic Taylor coefficient: G6 ~ (sigma/2) d1(h'^3)
  const double eps = 1e-3;
  const SurfaceField hp = ddx1(g, SurfaceField(eps * base));
  const SurfaceField taylor = 0.5 * ddx1(g, SurfaceField(hp.cube()));
  CHECK((g6_term(g, eps * base, 1.0, false) - taylor).abs().maxCoeff() < 1e-3 * taylor.abs().maxCoeff());

  const double gg = 1.0, sigma = 0.1;
  const SurfaceField h = random_surface(g, 21, 0.05, 4);
  const SurfaceField lhs = gg * h - sigma * ddx1(g, ddx1(g, h)) + g6_term(g, h, sigma, false);
  const SurfaceField rhs = gg * h - sigma * mean_curvature(g, h, false);
  CHECK((lhs - rhs).abs().maxCoeff() < 1e-9);
}

}
