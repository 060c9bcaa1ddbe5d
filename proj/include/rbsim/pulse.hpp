#ifndef RBSIM_PULSE_HPP
#define RBSIM_PULSE_HPP

#include <array>
#include <map>
#include <string>
#include <vector>

namespace rbsim {

/// PhysicalDrive pulses consume drive time theta/omega; FrameUpdate pulses are
/// instantaneous software Z rotations and carry no drive error.
enum class PulseKind { PhysicalDrive, FrameUpdate };

/// One rotation R(theta, phi). For PhysicalDrive, theta >= 0 (negative target
/// angles are normalized to phi + pi). FrameUpdate carries theta as the signed
/// Z-rotation angle.
struct Pulse {
  double theta = 0.0;
  double phi = 0.0;
  PulseKind kind = PulseKind::PhysicalDrive;

  static Pulse drive(double theta, double phi) {
    return {theta, phi, PulseKind::PhysicalDrive};
  }
  static Pulse frame_z(double theta) { return {theta, 0.0, PulseKind::FrameUpdate}; }
};

using PulseSequence = std::vector<Pulse>;

enum class SchemeKind { Primitive, B2, PD6 };

/// PD6 correction phases, keyed by target angle. Extra entries may be added for
/// target angles beyond the stock pi and pi/2 tables.
using Pd6Table = std::map<double, std::array<double, 6>>;

struct CompensationScheme {
  SchemeKind kind = SchemeKind::Primitive;
  Pd6Table pd6_table;  // consulted only when kind == PD6

  static CompensationScheme primitive() { return {SchemeKind::Primitive, {}}; }
  static CompensationScheme b2() { return {SchemeKind::B2, {}}; }
  static CompensationScheme pd6();  // stock table for theta in {pi, pi/2}
};

std::string scheme_name(SchemeKind kind);
SchemeKind scheme_from_name(const std::string& name);

/// B2 correction phase arccos(-theta_t / 4pi). Throws std::domain_error for
/// |theta_t| > 4pi.
double b2_phase(double theta_t);

/// Stock PD6 phase table lookup; throws std::invalid_argument for unsupported
/// target angles.
std::array<double, 6> pd6_table(double theta_t);

/// Expand a target rotation into its composite sequence, earliest pulse first.
/// FrameUpdate targets pass through unexpanded. Negative drive angles are
/// normalized to (|theta|, phi + pi) before expansion. Throws
/// std::invalid_argument for a PD6 target angle missing from the phase table.
PulseSequence expand(const Pulse& target, const CompensationScheme& scheme);

/// Total PhysicalDrive rotation angle of a sequence (frame updates excluded).
double total_drive_angle(const PulseSequence& seq);

}  // namespace rbsim

#endif
