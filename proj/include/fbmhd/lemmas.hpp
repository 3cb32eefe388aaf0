#pragma once

#include "fbmhd/geometry.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace fbmhd {

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = true;
};

/// ||f||_0^2 <= B2^-2 ||(B . grad) f||_0^2 for f vanishing on the bottom.
/// Throws std::invalid_argument when bbar2 = 0 or f does not vanish there.
InequalityCheck check_poincare_volume(const Grid& g, const VolumeField& f, double bbar1,
                                      double bbar2);
/// Same right side, left side the squared L2 norm of the surface trace.
InequalityCheck check_poincare_trace(const Grid& g, const VolumeField& f, double bbar1,
                                     double bbar2);

/// |v . N|_{-1/2} / (||v||_0 + ||div^phi v||_0); 0 when both sides vanish.
double check_normal_trace(const Grid& g, const Geometry& geo, const VectorVolumeField& v);

/// Fractional volume norms are geometric means of the neighbouring integer
/// norms, ||f||_{m+1/2} = (||f||_m ||f||_{m+1})^(1/2).
double fractional_volume_norm(const Grid& g, const VolumeField& f, double s);

/// ||P h||_s / |h|_{s-1/2} for s in {0.5, 1, 1.5, 2}.
double check_extension(const Grid& g, const SurfaceField& h, double s);

/// ||v||_r / (||v||_0 + ||curl v||_{r-1} + ||div v||_{r-1} + |v2|_{r-1/2}),
/// flat operators, r in {1, 2}.
double check_hodge(const Grid& g, const VectorVolumeField& v, int r);

/// Fourier-Chebyshev polynomial with random coefficients; evaluates to the
/// same continuous function on any grid.
class BandLimited {
 public:
  BandLimited(std::mt19937_64& rng, int max_mode, int max_degree);
  double operator()(double x1, double x2) const;
  double surface(double x1) const { return (*this)(x1, 0.0); }

 private:
  int max_mode_;
  int max_degree_;
  std::vector<double> a_, b_;
};

struct LemmaSuiteOptions {
  int nx = 16;
  int nz = 17;
  int samples = 200;
  std::uint64_t seed = 1;
  double bbar1 = 0.6;
  double bbar2 = 0.8;
  int max_mode = 3;
  int max_degree = 5;
  /// Amplitude of the random surfaces used for the curved normal trace.
  double surface_amplitude = 0.01;
  double stability_tol = 0.2;
};

struct LemmaReport {
  std::string name;
  int samples = 0;
  double max_ratio = 0.0;
  double max_ratio_fine = 0.0;
  /// max_ratio_fine / max_ratio.
  double refinement_ratio = 1.0;
  int failures = 0;
  bool pass = true;
};

/// Runs every check on the (nx, nz) grid and on (2 nx, 2 nz - 1) with the
/// same continuous samples.
std::vector<LemmaReport> run_lemma_suite(const LemmaSuiteOptions& opts);
std::string lemma_report_json(const LemmaSuiteOptions& opts, const std::vector<LemmaReport>& r);

}  // namespace fbmhd
