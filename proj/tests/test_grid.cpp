#include "fbmhd/grid.hpp"
#include "fbmhd/lemmas.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace fbmhd;
using oracle::pi;

TEST_SUITE("grid-spectral") {

TEST_CASE("node layout") {
  const Grid g(8, 8);
  for (int i = 0; i < 8; ++i) CHECK(g.x1()(i) == i / 8.0);
  CHECK(g.x2()(0) == 0.0);
  CHECK(g.x2()(7) == -1.0);
  for (int j = 1; j < 8; ++j) CHECK(g.x2()(j) < g.x2()(j - 1));

  const Grid g9(16, 9);
  for (int i = 0; i <= 8; ++i) CHECK(std::abs(g9.x2()(i) - (std::cos(i * pi / 8) - 1.0) / 2.0) < 1e-15);

  const Grid prod(64, 33);
  CHECK(std::abs(integrate_volume(prod, VolumeField::Ones(64, 33)) - 1.0) < 1e-13);
}

TEST_CASE("rejects bad sizes") {
  CHECK_THROWS_AS(Grid(9, 17), std::invalid_argument);
  CHECK_THROWS_AS(Grid(6, 17), std::invalid_argument);
  CHECK_THROWS_AS(Grid(16, 7), std::invalid_argument);
}

TEST_CASE("ddx1") {
  const Grid g(32, 9);
  const VolumeField f = g.sample([](double x1, double) { return std::sin(2 * pi * x1); });
  const VolumeField ex = g.sample([](double x1, double) { return 2 * pi * std::cos(2 * pi * x1); });
  CHECK((ddx1(g, f) - ex).abs().maxCoeff() < 1e-12);
  CHECK(ddx1(g, VolumeField(VolumeField::Constant(32, 9, 3.0))).abs().maxCoeff() < 1e-13);

  // five-point finite differences of the continuous function
  std::mt19937_64 rng(11);
  const BandLimited bl(rng, 4, 3);
  const VolumeField d = ddx1(g, g.sample(std::cref(bl)));
  const double step = 1e-4;
  double err = 0.0;
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.nz(); ++j) {
      const double x1 = g.x1()(i), x2 = g.x2()(j);
      const double fd = (-bl(x1 + 2 * step, x2) + 8 * bl(x1 + step, x2) - 8 * bl(x1 - step, x2) +
                         bl(x1 - 2 * step, x2)) /
                        (12 * step);
      err = std::max(err, std::abs(fd - d(i, j)));
    }
  CHECK(err < 1e-6);
}

TEST_CASE("ddx2") {
  const Grid g(16, 17);
  const VolumeField sq = g.sample([](double, double x2) { return x2 * x2; });
  const VolumeField lin = g.sample([](double, double x2) { return 2 * x2; });
  CHECK((ddx2(g, sq) - lin).abs().maxCoeff() < 1e-11);
  CHECK(ddx2(g, VolumeField(VolumeField::Ones(16, 17))).abs().maxCoeff() < 1e-12);

  const Grid g33(16, 33);
  const VolumeField e = g33.sample([](double x1, double x2) { return std::exp(2 * pi * x2) * std::cos(2 * pi * x1); });
  CHECK((ddx2(g33, e) - 2 * pi * e).abs().maxCoeff() < 1e-8);
}

TEST_CASE("quadrature") {
  const Grid g(16, 17);
  CHECK(std::abs(integrate_volume(g, VolumeField::Ones(16, 17)) - 1.0) < 1e-14);
  CHECK(std::abs(integrate_volume(g, g.sample([](double x1, double) { return std::cos(2 * pi * x1); }))) < 1e-14);
  const VolumeField p = g.sample([](double, double x2) { return (1 + x2) * (1 + x2); });
  CHECK(std::abs(integrate_volume(g, p) - 1.0 / 3.0) < 1e-12);

  // fundamental theorem in x2
  std::mt19937_64 rng(3);
  const BandLimited bl(rng, 3, 6);
  const VolumeField f = g.sample(std::cref(bl));
  const double jump = integrate_surface(g, top_row(f) - bottom_row(f));
  CHECK(std::abs(integrate_volume(g, ddx2(g, f)) - jump) < 1e-10);
}

TEST_CASE("surface norms") {
  const Grid g(16, 9);
  const SurfaceField c = g.sample_surface([](double x1) { return std::cos(2 * pi * x1); });
  CHECK(std::abs(surface_norm(g, c, 0.0) - std::sqrt(0.5)) < 1e-14);
  CHECK(std::abs(surface_norm(g, c, 1.0) - std::sqrt((1 + 4 * pi * pi) / 2)) < 1e-12);
  CHECK(surface_norm(g, g.surface_zeros(), 1.5) == 0.0);

  // Parseval against the nodal sum
  std::mt19937_64 rng(5);
  const BandLimited bl(rng, 5, 0);
  const SurfaceField h = g.sample_surface([&](double x1) { return bl.surface(x1); });
  const double nodal = integrate_surface(g, h.square());
  CHECK(std::abs(surface_norm(g, h, 0.0) * surface_norm(g, h, 0.0) - nodal) < 1e-12);
  const SurfaceModes m = g.forward(h);
  double coef = std::norm(m(0));
  for (int k = 1; k < g.num_modes(); ++k) coef += (k == g.nx() / 2 ? 1.0 : 2.0) * std::norm(m(k));
  CHECK(std::abs(coef - nodal) < 1e-12);
}

TEST_CASE("volume norms") {
  const Grid g(16, 17);
  CHECK(std::abs(volume_norm(g, VolumeField::Ones(16, 17), 2) - 1.0) < 1e-12);
  const VolumeField s = g.sample([](double x1, double) { return std::sin(2 * pi * x1); });
  CHECK(std::abs(anisotropic_norm(g, s, 0, 1) - std::sqrt(0.5) * (1 + 2 * pi)) < 1e-11);
  std::mt19937_64 rng(9);
  const VolumeField f = g.sample(BandLimited(rng, 3, 4));
  for (int m = 0; m <= 4; ++m) CHECK(anisotropic_norm(g, f, m, 0) == volume_norm(g, f, m));
  CHECK_THROWS_AS(volume_norm(g, f, 5), std::domain_error);
  CHECK_THROWS_AS(anisotropic_norm(g, f, 3, 2), std::domain_error);
}

TEST_CASE("ddx1 twice is the squared multiplier") {
  const Grid g(32, 9);
  std::mt19937_64 rng(2);
  const VolumeField f = g.sample(BandLimited(rng, 6, 3));
  FourierModes c = g.forward(f);
  for (int m = 0; m < g.num_modes(); ++m) c.row(m) *= -wavenumber(m) * wavenumber(m);
  c.row(g.nx() / 2).setZero();
  CHECK((ddx1(g, ddx1(g, f)) - g.inverse(c)).abs().maxCoeff() < 1e-10);
}

TEST_CASE("dealias") {
  const Grid g(16, 17);
  const VolumeField k = VolumeField::Constant(16, 17, 2.5);
  CHECK((dealias(g, k) - k).abs().maxCoeff() < 1e-13);
  const VolumeField nyq = g.sample([](double x1, double) { return std::cos(16 * pi * x1); });
  CHECK(dealias(g, nyq).abs().maxCoeff() < 1e-13);
  std::mt19937_64 rng(4);
  const VolumeField f = g.sample(BandLimited(rng, 8, 16));
  const VolumeField once = dealias(g, f);
  CHECK((dealias(g, once) - once).abs().maxCoeff() < 1e-13);
}

TEST_CASE("transform round trip") {
  const Grid g(32, 17);
  std::mt19937_64 rng(6);
  const VolumeField f = g.sample(BandLimited(rng, 10, 12));
  CHECK((g.inverse(g.forward(f)) - f).abs().maxCoeff() < 1e-12 * f.abs().maxCoeff());
}

}
