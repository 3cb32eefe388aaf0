#pragma once

#include "fbmhd/dynamics.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace fbmhd {

/// Linearization about rest at one horizontal wavenumber k (physical
/// wavenumber 2 pi k). Unknowns are stacked as
///   [v1 (nz), v2 (nz), b1 (nz), b2 (nz), h]
/// on the Chebyshev nodes. The pressure is eliminated by the same per-mode
/// solve the stepper uses, so the generator is the stepper's linear
/// tendency restricted to one mode.
struct ModeOperator {
  int k = 0;
  int nz = 0;
  Params params;
  /// Unconstrained generator: d/dt x = a_full x.
  Eigen::MatrixXcd a_full;
  /// Constraint rows c x = 0: interior div v, v2 on the bottom, b on both walls.
  Eigen::MatrixXcd c;
  /// Orthonormal basis of ker c and the generator restricted to it.
  Eigen::MatrixXcd z;
  Eigen::MatrixXcd a_reduced;
  /// Pencil e lambda x = a x: rows [z^H a_full; c] and [z^H; 0].
  Eigen::MatrixXcd pencil_a;
  Eigen::MatrixXcd pencil_e;
  std::vector<int> constraint_rows;
  /// |(I - z z^H) a_full z|; zero when the dynamics preserve the constraints.
  double invariance_defect = 0.0;

  int size() const { return 4 * nz + 1; }
  int v1(int j) const { return j; }
  int v2(int j) const { return nz + j; }
  int b1(int j) const { return 2 * nz + j; }
  int b2(int j) const { return 3 * nz + j; }
  int h() const { return 4 * nz; }
};

/// Throws ConfigError for k = 0 (the mean mode is handled exactly by the
/// stepper) or invalid params; kappa = 0 is allowed here.
ModeOperator assemble(int k, const Params& p, int nz);

/// Whether det(a - lambda e) is nonzero at two seeded random lambdas.
bool pencil_regular(const ModeOperator& op);

enum class Branch { magnetic, wave, vortical, spurious };
const char* branch_name(Branch b);

struct Eigenpair {
  std::complex<double> lambda;
  Branch branch = Branch::spurious;
  double residual = 0.0;
  /// Energy fractions of the eigenvector (kinetic, magnetic, surface).
  double frac_v = 0.0;
  double frac_b = 0.0;
  double frac_h = 0.0;
  /// Share of the field energy in the top third of the Chebyshev
  /// coefficients; near 1 for grid-scale artifacts.
  double tail = 0.0;
  Eigen::VectorXcd x;
};

struct SpectrumOptions {
  double cutoff = 1e8;
  double residual_tol = 1e-6;
  double tail_tol = 1e-2;
  bool keep_vectors = false;
};

struct Spectrum {
  int k = 0;
  /// Every computed pair, spurious ones included and flagged.
  std::vector<Eigenpair> pairs;
  /// Max Re over the non-spurious pairs (-inf if there are none).
  double abscissa = 0.0;
  int spurious = 0;
};

Spectrum spectrum(const ModeOperator& op, const SpectrumOptions& opts = {});

struct AbscissaEntry {
  int k = 0;
  double abscissa = 0.0;
};
struct AbscissaScan {
  std::vector<AbscissaEntry> per_k;
  double global = 0.0;
  int k_max_at = 0;
};
AbscissaScan spectral_abscissa(const Params& p, int k_max, int nz,
                               const SpectrumOptions& opts = {});

/// exp(t A) x0 on the constraint set. x0 must satisfy the constraints to
/// 1e-10 relative; throws std::invalid_argument otherwise.
Eigen::VectorXcd evolve_mode(const ModeOperator& op, const Eigen::VectorXcd& x0, double t);

/// Largest |c x| relative to |x|.
double constraint_violation(const ModeOperator& op, const Eigen::VectorXcd& x);

/// Projects an arbitrary vector onto the constraint set (orthogonally).
Eigen::VectorXcd constrain(const ModeOperator& op, const Eigen::VectorXcd& x);

/// Seeded resolved data on the constraint set: v from a streamfunction,
/// psi and b/(x2(1+x2)) with Chebyshev content below half the cutoff, and
/// a random h. Grid-scale data would also excite the neutral checkerboard
/// v2 that the spurious filter sets aside.
Eigen::VectorXcd random_mode_data(const ModeOperator& op, std::uint64_t seed);

/// Energy of a mode vector with the same weights the classifier uses.
double mode_energy(const ModeOperator& op, const Eigen::VectorXcd& x);

/// Row k of a state's Fourier coefficients packed in the mode layout, and
/// the single-mode state built from a mode vector (real fields).
Eigen::VectorXcd extract_mode(const Grid& g, const State& s, int k);
State mode_state(const Grid& g, const ModeOperator& op, const Eigen::VectorXcd& x);

/// CSV columns k, re, im, branch, residual; one row per pair.
void write_spectrum_csv(std::ostream& os, const std::vector<Spectrum>& spectra);

}  // namespace fbmhd
