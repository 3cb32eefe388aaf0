#pragma once

#include "fbmhd/dynamics.hpp"

#include <functional>
#include <string>
#include <vector>

namespace fbmhd {

struct DiagnosticsRecord {
  double t = 0.0;
  double e_phys = 0.0;
  double d_phys = 0.0;
  double e_tan = 0.0;
  double e_low = 0.0;
  double mean_h = 0.0;
  double mean_v1 = 0.0;
  double div_v_res = 0.0;
  double div_b_res = 0.0;
  double vorticity_norm = 0.0;
};

/// Column names in record order; shared by the CSV writer and reader.
const std::vector<std::string>& record_columns();
std::vector<double> record_values(const DiagnosticsRecord& r);
DiagnosticsRecord record_from_values(const std::vector<double>& v);

struct TimeSeries {
  std::vector<DiagnosticsRecord> records;
};

/// 1/2 [ int (|v|^2 + |b|^2) j dx + int (g h^2 + 2 sigma (sqrt(1 + h'^2) - 1)) dx1 ].
/// Linear mode uses j = 1 and the quadratic surface energy sigma h'^2.
double physical_energy(const Grid& g, const Params& p, const State& s, Mode mode);
/// kappa int |grad^phi b|^2 j dx (flat in linear mode).
double physical_dissipation(const Grid& g, const Params& p, const State& s, Mode mode);

/// (mean of h, int v1 j dx). Linear mode conserves the flat integral, so
/// j = 1 there.
std::pair<double, double> mean_drift(const Grid& g, const State& s, Mode mode = Mode::nonlinear);

/// Tangential energy |v|_{0,n}^2 + |b|_{0,n}^2 + |h|_{n+1}^2.
double tangential_energy(const Grid& g, const State& s, int n);
/// Lower-order energy proxy at order n with first time derivatives taken
/// from the tendency.
double low_energy(const Stepper& st, const State& s, const Tendency& t, int n);

DiagnosticsRecord make_record(const Stepper& st, const State& s, const Tendency& t, int order);

/// |E(t2) - E(t1) + int D dt| over records with t1 <= t <= t2 (trapezoid),
/// divided by max(max E on the window, 1e-14).
double energy_identity_residual(const TimeSeries& series, double t1, double t2);

enum class SeriesField { e_phys, d_phys, e_tan, e_low, vorticity_norm };
double series_value(const DiagnosticsRecord& r, SeriesField f);

struct DecayFit {
  double rate = 0.0;
  double r2 = 1.0;
  int samples = 0;
};

/// Least-squares slope of log(field) against t over t_start <= t <= t_end.
DecayFit decay_fit(const TimeSeries& series, SeriesField field, double t_start,
                   double t_end = 1e300);

struct SimulateOptions {
  int diag_order = 2;
  /// Checkpoint every this many steps (0 disables).
  long checkpoint_every = 0;
  double div_b_alarm = 1e-6;
  std::function<void(const DiagnosticsRecord&)> on_record;
  std::function<void(const State&)> on_checkpoint;
  std::function<void(const std::string&)> on_alarm;
  /// Receives the state at t_end when the run completes.
  State* final_state = nullptr;
};

/// Steps to t_end recording every record_every (both rounded to whole
/// steps). Records already emitted through on_record survive an abort.
TimeSeries simulate(const Stepper& st, const State& init, double t_end, double record_every,
                    const SimulateOptions& opts = {});

}  // namespace fbmhd
