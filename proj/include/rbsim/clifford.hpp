#ifndef RBSIM_CLIFFORD_HPP
#define RBSIM_CLIFFORD_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rbsim/pulse.hpp"
#include "rbsim/rng.hpp"
#include "rbsim/su2.hpp"

namespace rbsim {

/// One of the 24 single-qubit Clifford gates: its 1-based index, the physical
/// pulse decomposition (applied first-element-first), and the ideal unitary.
struct CliffordGate {
  int index = 0;
  std::string label;
  PulseSequence decomposition;
  Unitary2 ideal = Unitary2::identity();
};

/// The 24-element single-qubit Clifford group with its physical decompositions,
/// plus exact group arithmetic built from the unitaries at construction.
class CliffordGroup {
 public:
  CliffordGroup();

  static constexpr int size = 24;

  const CliffordGate& gate(int index) const { return gates_.at(index - 1); }
  const std::vector<CliffordGate>& gates() const { return gates_; }

  /// Index of gate(a) * gate(b) (a after b) in the group, modulo global phase.
  int compose(int a, int b) const { return product_[a - 1][b - 1]; }

  /// Index of the inverse of gate(a).
  int inverse(int a) const { return inverse_[a - 1]; }

 private:
  std::vector<CliffordGate> gates_;
  std::array<std::array<int, 24>, 24> product_{};
  std::array<int, 24> inverse_{};
};

/// Shared immutable instance.
const CliffordGroup& clifford_group();

/// L independent uniform draws from the 24 gates; deterministic in the stream.
std::vector<int> sample_sequence(int length, const RngStream& stream);

/// Lowest-index gate G such that G * (ideal product of seq) maps |0> onto the
/// target basis state (target_one ? |1> : |0>) up to global phase.
int inversion_gate(const std::vector<int>& seq, bool target_one);

/// Full self-check of the table: distinctness, closure, decomposition fidelity
/// and the conjugation action. Populates human-readable failure strings; the
/// optional corruption hook rotates one gate's first drive phase before
/// auditing (used to prove the audit catches table defects).
struct CliffordAuditResult {
  bool passed = true;
  std::vector<std::string> failures;
  std::array<bool, 24> gate_ok{};
};
CliffordAuditResult audit_clifford_table(int corrupt_gate = 0, double corrupt_by = 0.0);

}  // namespace rbsim

#endif
