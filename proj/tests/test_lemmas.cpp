#include "fbmhd/lemmas.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <json.hpp>

using namespace fbmhd;
using oracle::pi;

TEST_SUITE("lemma-suite") {

TEST_CASE("poincare examples") {
  const Grid g(16, 17);
  // f = 1 + x2: ||f||^2 = 1/3, ||d2 f||^2 = 1, trace 1
  const VolumeField f = g.sample([](double, double x2) { return 1.0 + x2; });
  const InequalityCheck v = check_poincare_volume(g, f, 0.0, 1.0);
  CHECK(v.lhs == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(v.rhs == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(v.pass);
  const InequalityCheck t = check_poincare_trace(g, f, 0.0, 1.0);
  CHECK(t.lhs == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t.rhs == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t.pass);

  // a horizontal field component only adds to the right side
  const InequalityCheck tilted = check_poincare_volume(g, f, 0.6, 0.8);
  CHECK(tilted.rhs == doctest::Approx(1.0).epsilon(1e-12));

  const InequalityCheck z = check_poincare_volume(g, g.zeros(), 0.6, 0.8);
  CHECK(z.lhs == 0.0);
  CHECK(z.pass);

  CHECK_THROWS_AS(check_poincare_volume(g, f, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(check_poincare_trace(g, VolumeField::Ones(16, 17), 0.6, 0.8), std::invalid_argument);
}

TEST_CASE("poincare on random samples") {
  const Grid g(16, 17);
  std::mt19937_64 rng(42);
  int failures = 0;
  double worst = 0.0;
  for (int n = 0; n < 200; ++n) {
    const BandLimited bl(rng, 3, 5);
    const VolumeField f = g.sample([&](double x1, double x2) { return (1 + x2) * bl(x1, x2); });
    for (const InequalityCheck& c : {check_poincare_volume(g, f, 0.6, 0.8), check_poincare_trace(g, f, 0.6, 0.8)}) {
      if (!c.pass) ++failures;
      worst = std::max(worst, c.lhs / c.rhs);
    }
  }
  CHECK(failures == 0);
  CHECK(worst <= 1.0);
}

TEST_CASE("extension oracle") {
  const Grid g(16, 33);
  const SurfaceField h = g.sample_surface([](double x1) { return std::cos(2 * pi * x1); });
  // P h = e^{2 pi x2} cos(2 pi x1)
  const double vol = (1 + 8 * pi * pi) * (1 - std::exp(-4 * pi)) / (8 * pi);
  const double trace = std::sqrt(1 + 4 * pi * pi) / 2;
  CHECK(check_extension(g, h, 1.0) == doctest::Approx(std::sqrt(vol / trace)).epsilon(1e-9));
  CHECK_THROWS(check_extension(g, h, 0.75));
}

TEST_CASE("hodge and normal trace") {
  const Grid g(16, 17);
  const VectorVolumeField u{VolumeField::Ones(16, 17), g.zeros()};
  CHECK(check_hodge(g, u, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(check_hodge(g, u, 2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS(check_hodge(g, u, 3));

  const Geometry flat = flat_geometry(g);
  CHECK(check_normal_trace(g, flat, {g.zeros(), g.zeros()}) == 0.0);
  // v = (0, 1 + x2): trace 1 on the surface, div 1
  const VectorVolumeField w{g.zeros(), g.sample([](double, double x2) { return 1 + x2; })};
  const double r = check_normal_trace(g, flat, w);
  CHECK(r == doctest::Approx(1.0 / (std::sqrt(1.0 / 3.0) + 1.0)).epsilon(1e-10));
}

TEST_CASE("fractional norms") {
  const Grid g(16, 17);
  const VolumeField f = g.sample([](double x1, double x2) { return std::sin(2 * pi * x1) * (1 + x2); });
  const double a = volume_norm(g, f, 1), b = volume_norm(g, f, 2);
  CHECK(fractional_volume_norm(g, f, 1.5) == doctest::Approx(std::sqrt(a * b)).epsilon(1e-14));
  CHECK(fractional_volume_norm(g, f, 1.0) == doctest::Approx(a).epsilon(1e-14));
}

TEST_CASE("band-limited samples are grid independent") {
  std::mt19937_64 r1(7), r2(7);
  const BandLimited a(r1, 3, 5), b(r2, 3, 5);
  CHECK(a(0.3, -0.4) == b(0.3, -0.4));
  CHECK(a.surface(0.25) == a(0.25, 0.0));
  CHECK(std::abs(a(0.1, -0.5) - a(1.1, -0.5)) < 1e-13);
}

TEST_CASE("suite") {
  LemmaSuiteOptions o;
  o.samples = 25;
  const std::vector<LemmaReport> rep = run_lemma_suite(o);
  std::vector<std::string> names;
  for (const auto& r : rep) {
    names.push_back(r.name);
    CHECK(r.samples == o.samples);
    CHECK(r.failures == 0);
    CHECK(r.pass);
    CHECK(std::isfinite(r.max_ratio));
    CHECK(r.refinement_ratio >= 1.0 - o.stability_tol);
    CHECK(r.refinement_ratio <= 1.0 + o.stability_tol);
  }
  CHECK(names == std::vector<std::string>{"poincare_volume", "poincare_trace", "normal_trace", "extension_s0.5",
                                          "extension_s1", "extension_s1.5", "extension_s2", "hodge_r1", "hodge_r2"});
  const auto j = nlohmann::json::parse(lemma_report_json(o, rep));
  CHECK(j.contains("lemmas"));
}

}
