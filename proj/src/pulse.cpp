#include "rbsim/pulse.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rbsim {

namespace {

constexpr double kPi = std::numbers::pi;

// Table keys are matched with a small tolerance so that pi-derived doubles
// computed along different routes still hit their entry.
const std::array<double, 6>* find_pd6(const Pd6Table& table, double theta_t) {
  for (const auto& [key, phases] : table) {
    if (std::abs(key - theta_t) < 1e-9) return &phases;
  }
  return nullptr;
}

Pulse normalized(const Pulse& target) {
  if (target.kind == PulseKind::PhysicalDrive && target.theta < 0.0) {
    return Pulse::drive(-target.theta, target.phi + kPi);
  }
  return target;
}

}  // namespace

CompensationScheme CompensationScheme::pd6() {
  CompensationScheme s{SchemeKind::PD6, {}};
  s.pd6_table[kPi] = {0.38266, -2.51430, -1.75192, 0.05941, 2.67572, 0.39344};
  s.pd6_table[kPi / 2.0] = {0.34769, -3.06979, 1.55852, -0.70890, 3.09692, -0.62174};
  return s;
}

std::string scheme_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Primitive: return "primitive";
    case SchemeKind::B2: return "b2";
    case SchemeKind::PD6: return "pd6";
  }
  throw std::logic_error("scheme_name: bad enum");
}

SchemeKind scheme_from_name(const std::string& name) {
  if (name == "primitive") return SchemeKind::Primitive;
  if (name == "b2") return SchemeKind::B2;
  if (name == "pd6") return SchemeKind::PD6;
  throw std::invalid_argument("unknown compensation scheme: " + name);
}

double b2_phase(double theta_t) {
  double x = -theta_t / (4.0 * kPi);
  if (!std::isfinite(x) || std::abs(x) > 1.0) {
    throw std::domain_error("b2_phase: |theta_t| must be <= 4pi");
  }
  return std::acos(x);
}

std::array<double, 6> pd6_table(double theta_t) {
  const auto stock = CompensationScheme::pd6().pd6_table;
  const auto* phases = find_pd6(stock, theta_t);
  if (!phases) throw std::invalid_argument("pd6_table: unsupported target angle");
  return *phases;
}

PulseSequence expand(const Pulse& raw_target, const CompensationScheme& scheme) {
  if (raw_target.kind == PulseKind::FrameUpdate) return {raw_target};
  Pulse target = normalized(raw_target);

  switch (scheme.kind) {
    case SchemeKind::Primitive:
      return {target};
    case SchemeKind::B2: {
      // R(t,p) -> R(t,p) R(pi,p+b) R(2pi,p+3b) R(pi,p+b); rightmost acts first.
      double b = b2_phase(target.theta);
      return {Pulse::drive(kPi, target.phi + b), Pulse::drive(2.0 * kPi, target.phi + 3.0 * b),
              Pulse::drive(kPi, target.phi + b), target};
    }
    case SchemeKind::PD6: {
      const auto* phases = find_pd6(scheme.pd6_table, target.theta);
      if (!phases) {
        throw std::invalid_argument("expand: no PD6 phase table entry for this target angle");
      }
      PulseSequence seq;
      seq.reserve(13);
      // Palindromic correction block 1..6,6..1, then the target rotation.
      for (int k = 0; k < 6; ++k) seq.push_back(Pulse::drive(kPi, target.phi + (*phases)[k]));
      for (int k = 5; k >= 0; --k) seq.push_back(Pulse::drive(kPi, target.phi + (*phases)[k]));
      seq.push_back(target);
      return seq;
    }
  }
  throw std::logic_error("expand: bad scheme enum");
}

double total_drive_angle(const PulseSequence& seq) {
  double total = 0.0;
  for (const Pulse& p : seq) {
    if (p.kind == PulseKind::PhysicalDrive) total += p.theta;
  }
  return total;
}

}  // namespace rbsim
