#include "fbmhd/errors.hpp"
#include "fbmhd/vorticity.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace fbmhd;
using oracle::pi;

namespace {

Params params(double b1, double b2, double kappa) {
  Params p;
  p.g = 1.0;
  p.sigma = 0.1;
  p.kappa = kappa;
  p.bbar1 = b1;
  p.bbar2 = b2;
  return p;
}

VectorVolumeField perp_grad(const Grid& g, const VolumeField& psi) {
  return {VolumeField(-ddx2(g, psi)), ddx1(g, psi)};
}

// solenoidal v and b; b vanishes on both walls, v2 on the bottom
State solenoidal_state(const Grid& g) {
  State s = zero_state(g);
  s.v = perp_grad(g, g.sample([](double x1, double x2) {
    return 0.01 * std::cos(4 * pi * x1) * x2 * (1 + x2) * (1 + x2);
  }));
  s.b = perp_grad(g, g.sample([](double x1, double x2) {
    return 0.01 * std::sin(2 * pi * x1) * x2 * x2 * (1 + x2) * (1 + x2);
  }));
  return s;
}

StepConfig linear_cfg(double dt) {
  StepConfig c;
  c.mode = Mode::linear;
  c.dt = dt;
  return c;
}

InitSpec data() {
  InitSpec s;
  s.seed = 4;
  s.amplitude = 0.01;
  s.h_modes = {1, 2};
  s.v_modes = {1, 2};
  return s;
}

VorticityAudit audit_after(const Stepper& st, int steps) {
  State a = make_initial_data(st, data());
  for (int n = 0; n < steps; ++n) a = st.step(a);
  const State b = st.step(a);
  const State c = st.step(b);
  return vorticity_residual(st.grid(), st.params(), Mode::linear, a, b, c);
}

}  // namespace

TEST_SUITE("vorticity") {

TEST_CASE("damping coefficient") {
  CHECK(damping_coefficient(params(0, 1, 0.5)) == 2.0);
  CHECK(damping_coefficient(params(1, 0, 1.0)) == 0.0);
  CHECK(damping_coefficient(params(0.3, 0.4, 0.2)) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(damping_coefficient(params(-0.3, -0.4, 0.2)) == damping_coefficient(params(0.3, 0.4, 0.2)));
  CHECK_THROWS_AS(damping_coefficient(params(0, 1, 0.0)), ConfigError);
  CHECK_THROWS_AS(damping_coefficient(params(0, 1, -1.0)), ConfigError);
}

TEST_CASE("curl identities") {
  const Grid g(16, 33);
  const Params p = params(0.6, 0.8, 1.0);
  State eq = zero_state(g);
  CHECK(curl_identity_check(g, p, eq) == 0.0);

  const State s = solenoidal_state(g);
  CHECK(flat_div(g, s.v).abs().maxCoeff() < 1e-10);
  CHECK(curl_identity_check(g, p, s) <= 1e-8);

  // a compressive part in b breaks the identity at the size of its divergence
  State bad = s;
  const VolumeField chi = g.sample([](double x1, double x2) { return 0.01 * std::cos(2 * pi * x1) * x2 * x2; });
  bad.b.c1 += ddx1(g, chi);
  bad.b.c2 += ddx2(g, chi);
  const double div = flat_div(g, bad.b).abs().maxCoeff();
  CHECK(curl_identity_check(g, p, bad) > 1e-3 * div);
}

TEST_CASE("residual bookkeeping") {
  const Grid g(16, 17);
  const Params p = params(0, 1, 1.0);
  State eq = zero_state(g);
  eq.t = 0.0;
  State e1 = eq, e2 = eq;
  e1.t = 0.01;
  e2.t = 0.02;
  const VorticityAudit a = vorticity_residual(g, p, Mode::linear, eq, e1, e2);
  CHECK(a.residual_norm == 0.0);
  CHECK(a.damping_coeff == 1.0);
  e2.t = 0.03;
  CHECK_THROWS_AS(vorticity_residual(g, p, Mode::linear, eq, e1, e2), std::invalid_argument);
}

TEST_CASE("isolated damping") {
  const Grid g(16, 17);
  const Params p = params(0, 1, 1.0);
  const VolumeField w0 = g.sample([](double x1, double x2) { return std::sin(2 * pi * x1) * std::cos(pi * x2); });
  const DampingOracle o = isolated_damping(g, p, w0, 1.0, 1e-2);
  CHECK(o.expected == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(o.relative_error <= 1e-2);

  // uniform horizontal transport only shifts the field
  const VectorVolumeField v{VolumeField::Constant(16, 17, 0.3), g.zeros()};
  const DampingOracle t = isolated_damping(g, params(0.5, 0.5, 0.25), w0, 1.0, 1e-2, &v);
  CHECK(t.expected == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(t.relative_error <= 1e-2);

  CHECK_THROWS_AS(isolated_damping(g, p, w0, 1.0, 0.3), std::invalid_argument);
}

TEST_CASE("linear trajectory residual") {
  // the raw residual carries the discrete divergence of b; with that part
  // removed the centred differences leave an O(dt^2) remainder
  const Grid g(16, 17);
  const Params p = params(0, 1, 1.0);
  const Stepper coarse(g, p, linear_cfg(2e-3));
  const Stepper fine(g, p, linear_cfg(1e-3));
  const VorticityAudit ac = audit_after(coarse, 50);
  const VorticityAudit af = audit_after(fine, 100);
  CHECK(af.relative_corrected <= 1e-3);
  CHECK(ac.relative_corrected / af.relative_corrected >= 3.0);
  CHECK(af.largest_term > 0.0);
}

}
