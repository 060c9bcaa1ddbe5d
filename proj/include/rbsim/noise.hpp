#ifndef RBSIM_NOISE_HPP
#define RBSIM_NOISE_HPP

#include "rbsim/pulse.hpp"
#include "rbsim/su2.hpp"

namespace rbsim {

/// How the per-sequence detuning tilt delta (detuning / Rabi ratio) is chosen.
struct DeltaSpec {
  enum class Mode { Fixed, Uniform };
  Mode mode = Mode::Fixed;
  double value = 0.0;  // Fixed: the ratio used for every sequence
  double max = 0.0;    // Uniform: draw from [0, max] per sequence

  static DeltaSpec fixed(double v) { return {Mode::Fixed, v, 0.0}; }
  static DeltaSpec uniform(double max) { return {Mode::Uniform, 0.0, max}; }
};

/// Off-resonant comb-pair drive riding on every physical pulse: relative
/// amplitudes amp1 at delta', amp2 at 2*delta'.
struct OffResonantSpec {
  bool enabled = false;
  double amp1 = 2.0;
  double amp2 = 1.0;
  double delta_prime_ratio = 90.0;  // delta' / Omega
  bool resample_phases = true;      // phi1, phi2 drawn uniform per sequence
  double phi1 = 0.0;                // used when resample_phases is false
  double phi2 = 0.0;
};

/// Error model for a whole experiment. epsilon is systematic (fixed per run);
/// delta and the off-resonant phases are drawn once per sequence by the engine
/// and passed in as a NoiseRealization, keeping this module deterministic.
struct NoiseModel {
  double epsilon = 0.0;
  DeltaSpec delta;
  double omega = 2.0 * 3.14159265358979323846 * 50e3;  // rad/s Rabi frequency
  OffResonantSpec offres;

  /// Throws std::invalid_argument on out-of-range parameters.
  void validate() const;
};

/// Per-sequence noise draws.
struct NoiseRealization {
  double delta = 0.0;
  double phi1 = 0.0;
  double phi2 = 0.0;
};

/// Time-dependent drive for one physical pulse:
///   H(t) = (omega/2) [ sigma_phi + delta Z
///                      + amp1 (X cos(d't+phi1) + Y sin(d't+phi1))
///                      + amp2 (X cos(2d't+phi2) + Y sin(2d't+phi2)) ]
/// with duration = theta (1+epsilon) / omega for the pulse it realizes.
struct DriveHamiltonian {
  double omega = 0.0;     // rad/s
  double phi = 0.0;       // resonant drive phase
  double duration = 0.0;  // s
  double delta = 0.0;     // constant Z tilt (detuning / Rabi ratio)
  double amp1 = 0.0;      // off-resonant pair amplitudes; 0 disables the term
  double amp2 = 0.0;
  double delta_prime = 0.0;  // rad/s
  double phi1 = 0.0;
  double phi2 = 0.0;
};

/// Drive realizing pulse p under model m with this sequence's noise draws.
DriveHamiltonian make_drive(const Pulse& p, const NoiseModel& m, const NoiseRealization& r);

/// Closed-form imperfect propagator exp[-i/2 theta (1+eps) (sigma_phi + delta Z)].
/// FrameUpdate pulses return the exact diag(e^{-i theta/2}, e^{i theta/2}) with
/// no error applied.
Unitary2 propagator_closed_form(const Pulse& p, const NoiseModel& m, double delta_draw);

/// Second-order Magnus propagator exp(O1 + O2) for the drive above, with both
/// integrals evaluated from closed-form antiderivatives of the sinusoids.
/// Throws std::domain_error on non-finite parameters or when off-resonant
/// amplitudes are enabled with delta_prime == 0.
Unitary2 magnus2_propagator(const DriveHamiltonian& h);

/// Reference oracle: ordered product of exp(-i H(t_k) dt) over midpoint-sampled
/// steps. Second-order accurate in dt.
Unitary2 integrator_propagator(const DriveHamiltonian& h, long steps);

/// Z tilt of the effective rotation axis of the Magnus propagator:
/// (Z component) / (in-plane component) of the rotation axis. Throws
/// std::domain_error when the propagator is within ~1e-12 of ±I.
double effective_delta(const DriveHamiltonian& h);

/// Noisy propagator for one pulse of a sequence: frame updates are exact; with
/// off-resonant terms enabled physical pulses use the Magnus propagator,
/// otherwise the closed form.
Unitary2 pulse_propagator(const Pulse& p, const NoiseModel& m, const NoiseRealization& r);

}  // namespace rbsim

#endif
