#pragma once

#include "fbmhd/dynamics.hpp"

namespace fbmhd {

/// Bbar2^2 / kappa. Throws ConfigError unless kappa > 0.
double damping_coefficient(const Params& p);

/// Largest nodal discrepancy of the two algebraic identities behind the
/// damped vorticity equation,
///   Bbar.grad curl b = Bbar x Delta b,
///   Bbar.grad (Bbar x v) = Bbar2^2 curl v + d1(Bbar1 Bbar x v - Bbar2 Bbar.v),
/// all operators flattened with the geometry of s.h. Both need div v, div b = 0.
double curl_identity_check(const Grid& g, const Params& p, const State& s);

/// The four displayed groups of the quadratic remainder.
struct PhiGroups {
  VolumeField tilt;            // (1/kappa) d1 eta d2(Bbar1 Bbar x v - Bbar2 Bbar.v)
  VolumeField surface_motion;  // -(1/kappa) dt eta d2(Bbar x b)
  VolumeField cross_transport; // (1/kappa)(v.grad(Bbar x b) - b.grad(Bbar x v))
  VolumeField lorentz;         // curl(b.grad b)
};

struct VorticityAudit {
  VolumeField omega;
  /// Left side minus right side on the middle state.
  VolumeField residual;
  double damping_coeff = 0.0;

  VolumeField dt_omega;       // dt^phi omega
  VolumeField advection;      // v.grad omega
  VolumeField damping;        // (Bbar2^2/kappa) omega
  VolumeField shear;          // -(1/kappa) d1(Bbar1 Bbar x v - Bbar2 Bbar.v)
  VolumeField induction;      // (1/kappa) dt(Bbar x b)
  PhiGroups phi;

  /// What the residual would be if the stepped fields had div b = 0 exactly:
  /// -Bbar x grad(div b), plus curl((div b) b) from the conservative Lorentz
  /// form in nonlinear runs.
  VolumeField div_b_defect;
  double div_b_norm = 0.0;

  double residual_norm = 0.0;
  double largest_term = 0.0;
  double relative_residual = 0.0;
  /// Relative residual after removing div_b_defect.
  double relative_corrected = 0.0;
};

/// Residual of the damped vorticity equation on the middle of three states
/// spaced by a uniform dt; time derivatives by centered differences. In
/// linear mode the flat operators are used and the quadratic terms are
/// left out.
VorticityAudit vorticity_residual(const Grid& g, const Params& p, Mode mode, const State& prev,
                                  const State& mid, const State& next);

struct DampingOracle {
  double norm0 = 0.0;
  double norm_t = 0.0;
  double observed = 0.0;  // norm_t / norm0
  double expected = 0.0;  // exp(-Bbar2^2 t / kappa)
  double relative_error = 0.0;
};

/// Integrates dt omega + v.grad omega + (Bbar2^2/kappa) omega = 0 alone with
/// b frozen at zero and the coupling terms switched off; v is a frozen flat
/// field (zero when null). Classical RK4 with step dt.
DampingOracle isolated_damping(const Grid& g, const Params& p, const VolumeField& omega0,
                               double t_end, double dt, const VectorVolumeField* v = nullptr);

}  // namespace fbmhd
