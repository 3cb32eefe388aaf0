#include "fbmhd/errors.hpp"
#include "fbmhd/modes.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <sstream>

using namespace fbmhd;
using oracle::pi;

namespace {

Params params(double b1, double b2, double kappa = 1.0) {
  Params p;
  p.g = 1.0;
  p.sigma = 0.1;
  p.kappa = kappa;
  p.bbar1 = b1;
  p.bbar2 = b2;
  return p;
}

std::vector<std::complex<double>> physical(const Spectrum& s) {
  std::vector<std::complex<double>> out;
  for (const Eigenpair& e : s.pairs)
    if (e.branch != Branch::spurious) out.push_back(e.lambda);
  return out;
}

double nearest(const std::vector<std::complex<double>>& ls, std::complex<double> target) {
  double best = std::numeric_limits<double>::infinity();
  for (auto l : ls) best = std::min(best, std::abs(l - target));
  return best;
}

Eigen::VectorXcd random_constrained(const ModeOperator& op, std::uint64_t seed) {
  PortableRng rng(seed);
  Eigen::VectorXcd x(op.size());
  for (int i = 0; i < op.size(); ++i) x(i) = {rng.uniform(), rng.uniform()};
  return constrain(op, x);
}

}  // namespace

TEST_SUITE("modes") {

TEST_CASE("assembly") {
  const ModeOperator op = assemble(2, params(0, 1), 17);
  CHECK(op.size() == 4 * 17 + 1);
  CHECK(op.a_full.rows() == op.size());
  CHECK(op.z.cols() + op.c.rows() == op.size());
  CHECK(op.invariance_defect < 1e-8);
  CHECK((op.z.adjoint() * op.z - Eigen::MatrixXcd::Identity(op.z.cols(), op.z.cols())).norm() < 1e-12);
  CHECK((op.c * op.z).norm() < 1e-10 * op.c.norm());
  CHECK(pencil_regular(op));
  CHECK_THROWS_AS(assemble(0, params(0, 1), 17), ConfigError);
  // kappa = 0 is a legitimate limit for the spectrum
  CHECK_NOTHROW(assemble(1, params(0, 1, 0.0), 17));
}

TEST_CASE("field-free limit") {
  const Params p = params(0, 0, 0.7);
  for (int k = 1; k <= 4; ++k) {
    const double kp = 2 * pi * k;
    const auto ls = physical(spectrum(assemble(k, p, 33)));
    const double om = std::sqrt(oracle::dispersion(p.g, p.sigma, kp));
    CHECK(nearest(ls, {0.0, om}) <= 1e-6 * om);
    CHECK(nearest(ls, {0.0, -om}) <= 1e-6 * om);
    for (int n = 1; n <= 3; ++n) {
      const double rate = oracle::heat_rate(p.kappa, kp, n);
      CHECK(nearest(ls, rate) <= 1e-6 * std::abs(rate));
    }
  }
}

TEST_CASE("decay with a vertical field") {
  for (int nz : {17, 33}) {
    const AbscissaScan scan = spectral_abscissa(params(0, 1), 4, nz);
    REQUIRE(scan.per_k.size() == 4);
    for (const auto& e : scan.per_k) CHECK(e.abscissa < -1e-8);
    CHECK(scan.global < -1e-8);
    CHECK(scan.k_max_at >= 1);
  }
  // the abscissa is resolved already at nz = 17
  const double a17 = spectrum(assemble(1, params(0, 1), 17)).abscissa;
  const double a33 = spectrum(assemble(1, params(0, 1), 33)).abscissa;
  CHECK(std::abs(a17 - a33) <= 1e-8 * std::abs(a33));

  // reversing the background field changes nothing
  const double rev = spectrum(assemble(1, params(0, -1), 17)).abscissa;
  CHECK(std::abs(rev - a17) <= 1e-10 * std::abs(a17));
  CHECK_THROWS_AS(spectral_abscissa(params(0, 1), 0, 17), ConfigError);
}

TEST_CASE("conjugate pairs") {
  // real fields: the spectrum at -k is the conjugate of the one at k
  const auto plus = physical(spectrum(assemble(2, params(0.6, 0.8), 17)));
  const auto minus = physical(spectrum(assemble(-2, params(0.6, 0.8), 17)));
  REQUIRE(plus.size() == minus.size());
  for (auto l : plus) CHECK(nearest(minus, std::conj(l)) <= 1e-8 * std::max(1.0, std::abs(l)));
}

TEST_CASE("evolve_mode") {
  const ModeOperator op = assemble(1, params(0.6, 0.8), 17);
  CHECK(evolve_mode(op, Eigen::VectorXcd::Zero(op.size()), 0.3).norm() == 0.0);

  SpectrumOptions keep;
  keep.keep_vectors = true;
  const Spectrum s = spectrum(op, keep);
  const Eigenpair* wave = nullptr;
  for (const Eigenpair& e : s.pairs)
    if (e.branch == Branch::wave) {
      wave = &e;
      break;
    }
  REQUIRE(wave != nullptr);
  CHECK((evolve_mode(op, wave->x, 0.2) - std::exp(wave->lambda * 0.2) * wave->x).norm() <= 1e-8 * wave->x.norm());

  // independent integration of the reduced system
  const Eigen::VectorXcd x0 = random_constrained(op, 17);
  const double t = 0.05;
  const Eigen::VectorXcd ref = op.z * oracle::dopri(op.a_reduced, op.z.adjoint() * x0, t);
  CHECK((evolve_mode(op, x0, t) - ref).norm() <= 1e-8 * x0.norm());

  Eigen::VectorXcd off = x0;
  off(op.b1(0)) += 1.0;
  CHECK(constraint_violation(op, off) > 1e-3);
  CHECK_THROWS_AS(evolve_mode(op, off, t), std::invalid_argument);
  CHECK_THROWS_AS(evolve_mode(op, Eigen::VectorXcd::Zero(3), t), std::invalid_argument);
}

TEST_CASE("random data decays") {
  for (int k : {1, 3}) {
    const ModeOperator op = assemble(k, params(0, 1), 17);
    const double a = spectrum(op).abscissa;
    const double t = 3.0 / std::abs(a);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Eigen::VectorXcd x0 = random_mode_data(op, seed);
      CHECK(constraint_violation(op, x0) <= 1e-12);
      const double e0 = mode_energy(op, x0);
      const double e1 = mode_energy(op, evolve_mode(op, x0, t));
      const double e2 = mode_energy(op, evolve_mode(op, x0, 2 * t));
      CHECK(e1 < 0.01 * e0);
      // late decay at twice the abscissa
      CHECK(e2 / e1 <= 1.05 * std::exp(2 * a * t));
    }
  }

  // grid-scale data keeps a neutral checkerboard in v2
  const ModeOperator op = assemble(1, params(0, 1), 17);
  Eigen::VectorXcd chk = Eigen::VectorXcd::Zero(op.size());
  for (int j = 1; j < op.nz - 1; j += 2) chk(op.v2(j)) = 1.0;
  CHECK(constraint_violation(op, chk) <= 1e-12);
  CHECK((op.a_full * chk).norm() <= 1e-10);
}

TEST_CASE("state packing") {
  const Grid g(16, 17);
  const ModeOperator op = assemble(2, params(0, 1), 17);
  const Eigen::VectorXcd x = random_constrained(op, 3);
  const State s = mode_state(g, op, x);
  CHECK((extract_mode(g, s, 2) - x).norm() <= 1e-12 * x.norm());
  CHECK(extract_mode(g, s, 1).norm() <= 1e-12 * x.norm());
  CHECK_THROWS_AS(extract_mode(g, s, 0), std::invalid_argument);
  CHECK_THROWS_AS(mode_state(Grid(16, 33), op, x), std::invalid_argument);
}

TEST_CASE("spectrum csv") {
  std::vector<Spectrum> sp{spectrum(assemble(1, params(0, 1), 17)), spectrum(assemble(2, params(0, 1), 17))};
  std::ostringstream os;
  write_spectrum_csv(os, sp);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "k,re,im,branch,residual");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 4);
  }
  CHECK(rows == static_cast<int>(sp[0].pairs.size() + sp[1].pairs.size()));
}

}
