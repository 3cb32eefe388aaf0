#pragma once

#include "fbmhd/elliptic.hpp"
#include "fbmhd/geometry.hpp"
#include "fbmhd/grid.hpp"

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

namespace fbmhd {

struct Params {
  double g = 0.0;
  double sigma = 0.0;
  double kappa = 0.0;
  double bbar1 = 0.0;
  double bbar2 = 0.0;

  /// Throws ConfigError unless g, sigma > 0 and kappa > 0 (kappa = 0 only
  /// when allowed).
  void validate(bool allow_zero_kappa) const;
};

enum class Mode { linear, nonlinear };

/// etdrk4: exponential RK4 (Krogstad stages) with the flat diffusion exact (default).
/// rk4_cn: Strang split, Crank-Nicolson half steps around an RK4 step.
/// euler_cn: Lie split, forward Euler then a Crank-Nicolson step.
enum class Scheme { etdrk4, rk4_cn, euler_cn };

struct StepConfig {
  double dt = 1e-3;
  Scheme scheme = Scheme::etdrk4;
  Mode mode = Mode::nonlinear;
  bool dealias = true;
  double c_cfl = 0.5;
  double j_min = kDefaultJacobianFloor;
  int pressure_max_iter = 50;
  double pressure_tol = 1e-10;
};

/// c_cfl (sigma (pi nx)^3 + g pi nx)^(-1/2).
double stability_bound(const Grid& g, const Params& p, double c_cfl);

struct State {
  double t = 0.0;
  VectorVolumeField v;
  VectorVolumeField b;
  SurfaceField h;
  /// Derived: pressure from the last tendency evaluation (also the warm
  /// start of the next fixed-point solve) and the geometry of h.
  VolumeField q;
  Geometry geo;
};

State zero_state(const Grid& g);

struct GTerms {
  VectorVolumeField g1;
  VolumeField g2;
  VectorVolumeField g3;
  VolumeField g4;
  SurfaceField g5;
  SurfaceField g6;
};

/// Time derivatives of a state. db excludes the flat diffusion kappa Delta b,
/// which the integrators treat separately.
struct Tendency {
  VectorVolumeField dv;
  VectorVolumeField db;
  SurfaceField dh;
  VolumeField q;
  Geometry geo;
  int pressure_iterations = 0;
};

class DiffusionPropagator;

class Stepper {
 public:
  Stepper(const Grid& g, const Params& p, const StepConfig& cfg);
  ~Stepper();
  Stepper(const Stepper&) = delete;
  Stepper& operator=(const Stepper&) = delete;

  const Grid& grid() const { return grid_; }
  const Params& params() const { return params_; }
  const StepConfig& config() const { return cfg_; }
  const EllipticSolver& solver() const { return solver_; }

  Tendency tendency(const State& s) const { return tendency(s, cfg_.mode); }
  Tendency tendency(const State& s, Mode mode) const;
  /// kappa Delta b with walls held at zero (flat Laplacian).
  VectorVolumeField flat_diffusion(const VectorVolumeField& b) const;

  /// Pressure for a given geometry, force density and surface value.
  VolumeField solve_pressure(const Geometry& geo, const VectorVolumeField& force,
                             const SurfaceField& top, const VolumeField* guess,
                             int* iterations) const;

  /// One step. When first is given it must be the tendency of s; it is
  /// reused as the first stage.
  State step(const State& s, const Tendency* first = nullptr) const;

  /// Projection, flux pinning and wall pinning applied after every step
  /// and by the initial-data constructor.
  void enforce_constraints(State& s) const;

  /// Refresh derived fields (geometry, pressure) without stepping.
  /// keep_pressure leaves q alone, as a restored checkpoint needs.
  void refresh(State& s, bool keep_pressure = false) const;

 private:
  struct Rates {
    VectorVolumeField dv;
    VectorVolumeField db;
    SurfaceField dh;
  };
  Rates rates(const State& s, VolumeField* q_out) const;
  static Rates as_rates(const Tendency& t);
  State step_etdrk4(const State& s, const Rates& nu) const;
  State step_rk4_cn(const State& s) const;
  State step_euler_cn(const State& s, const Rates& nu) const;
  Tendency tendency_linear(const State& s) const;
  Tendency tendency_nonlinear(const State& s) const;

  Grid grid_;
  Params params_;
  StepConfig cfg_;
  EllipticSolver solver_;
  std::unique_ptr<DiffusionPropagator> prop_;
  Geometry flat_geo_;
};

/// G terms of the perturbed form, built from the current state and its
/// pressure (the kinematic right side supplies d_t h).
GTerms compute_G(const Stepper& st, const State& s);

VolumeField pressure_from_state(const Stepper& st, const State& s);

struct ExplicitRhs {
  VectorVolumeField dv;
  SurfaceField dh;
};
ExplicitRhs rhs_explicit(const Stepper& st, const State& s);

/// (I - kappa dt/2 Delta) b_new = (I + kappa dt/2 Delta) b + dt (Bbar.grad v + G3),
/// walls at zero. g3 may be null.
VectorVolumeField diffuse_b_implicit(const Stepper& st, const VectorVolumeField& b,
                                     const VectorVolumeField& v, double dt,
                                     const VectorVolumeField* g3 = nullptr);

struct InitSpec {
  std::uint64_t seed = 0;
  double amplitude = 0.0;
  std::vector<int> h_modes;
  std::vector<int> v_modes;
  bool b_zero = true;
};

/// Seeded small data satisfying the state invariants.
State make_initial_data(const Stepper& st, const InitSpec& spec);

/// Seeded uniform numbers in [-1, 1). The engine output is fixed by the
/// standard; the conversion to double is done here so that no
/// implementation-defined distribution is involved.
class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed) : eng_(seed) {}
  double uniform() { return 2.0 * static_cast<double>(eng_() >> 11) * 0x1.0p-53 - 1.0; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace fbmhd
