#include "rbsim/clifford.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace rbsim {

namespace {

constexpr double kPi = std::numbers::pi;

Pulse px() { return Pulse::drive(kPi, 0.0); }
Pulse py() { return Pulse::drive(kPi, kPi / 2.0); }
Pulse px2() { return Pulse::drive(kPi / 2.0, 0.0); }
Pulse py2() { return Pulse::drive(kPi / 2.0, kPi / 2.0); }
Pulse pmx2() { return Pulse::drive(kPi / 2.0, kPi); }
Pulse pmy2() { return Pulse::drive(kPi / 2.0, 3.0 * kPi / 2.0); }
Pulse pz() { return Pulse::frame_z(kPi); }
Pulse pz2() { return Pulse::frame_z(kPi / 2.0); }
Pulse pmz2() { return Pulse::frame_z(-kPi / 2.0); }

Unitary2 ideal_pulse(const Pulse& p) {
  if (p.kind == PulseKind::FrameUpdate) {
    return pauli_axis_unitary(p.theta, {0.0, 0.0, 1.0});
  }
  return pauli_axis_unitary(p.theta, {std::cos(p.phi), std::sin(p.phi), 0.0});
}

Unitary2 ideal_product(const PulseSequence& seq) {
  Unitary2 u = Unitary2::identity();
  for (const Pulse& p : seq) u = ideal_pulse(p) * u;
  return u;
}

// Signed permutation of the Pauli axes realized by conjugation U P U†.
// Encodes the image of each of X, Y, Z as axis*2 + (sign < 0). The action is
// global-phase free, so it identifies a Clifford group element exactly.
struct PauliAction {
  std::array<int, 3> image{};
  bool operator<(const PauliAction& o) const { return image < o.image; }
};

const Mat2 kPauli[3] = {
    {{0, 0}, {1, 0}, {1, 0}, {0, 0}},   // X
    {{0, 0}, {0, -1}, {0, 1}, {0, 0}},  // Y
    {{1, 0}, {0, 0}, {0, 0}, {-1, 0}},  // Z
};

// ok=nullptr: throw on failure; otherwise report through *ok.
PauliAction pauli_action(const Unitary2& u, double tol, bool* ok = nullptr) {
  if (ok) *ok = true;
  PauliAction act{};
  for (int p = 0; p < 3; ++p) {
    Mat2 m = u.matrix() * kPauli[p] * u.matrix().dagger();
    auto comp = pauli_components(m);
    int best = -1;
    double sign = 0.0;
    for (int q = 1; q <= 3; ++q) {
      if (std::abs(comp[q].real()) > 0.5) {
        best = q - 1;
        sign = comp[q].real();
      }
    }
    double residual = 1.0;
    if (best >= 0) {
      residual = std::abs(std::abs(sign) - 1.0) + std::abs(comp[0]);
      for (int q = 1; q <= 3; ++q) {
        if (q - 1 != best) residual += std::abs(comp[q]);
      }
    }
    if (best < 0 || residual > tol) {
      if (!ok) throw std::logic_error("pauli_action: image is not a signed Pauli axis");
      *ok = false;
      return act;
    }
    act.image[p] = best * 2 + (sign < 0.0 ? 1 : 0);
  }
  return act;
}

struct TableRow {
  const char* label;
  PulseSequence pulses;
};

// Table of the 24 Cliffords as physical gates; "A & B" applies A first.
std::vector<TableRow> physical_table() {
  return {
      {"I", {}},
      {"X", {px()}},
      {"Y", {py()}},
      {"Z", {pz()}},
      {"X/2", {px2()}},
      {"Y/2", {py2()}},
      {"Z/2", {pz2()}},
      {"-X/2", {pmx2()}},
      {"-Y/2", {pmy2()}},
      {"-Z/2", {pmz2()}},
      {"Z & X/2", {pz(), px2()}},
      {"X/2 & Z", {px2(), pz()}},
      {"Z/2 & X", {pz2(), px()}},
      {"X & Z/2", {px(), pz2()}},
      {"Z/2 & X/2", {pz2(), px2()}},
      {"Y/2 & Z/2", {py2(), pz2()}},
      {"X/2 & -Z/2", {px2(), pmz2()}},
      {"Y/2 & Z", {py2(), pz()}},
      {"-X/2 & Z/2", {pmx2(), pz2()}},
      {"-Z/2 & Y/2", {pmz2(), py2()}},
      {"Z & Y/2", {pz(), py2()}},
      {"-Z/2 & X/2", {pmz2(), px2()}},
      {"X/2 & Z/2", {px2(), pz2()}},
      {"-Y/2 & -Z/2", {pmy2(), pmz2()}},
  };
}

}  // namespace

CliffordGroup::CliffordGroup() {
  auto rows = physical_table();
  gates_.reserve(rows.size());
  std::map<PauliAction, int> by_action;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CliffordGate g;
    g.index = static_cast<int>(i) + 1;
    g.label = rows[i].label;
    g.decomposition = rows[i].pulses;
    g.ideal = ideal_product(g.decomposition);
    PauliAction act = pauli_action(g.ideal, 1e-10);
    if (!by_action.emplace(act, g.index).second) {
      throw std::logic_error("CliffordGroup: duplicate gate in table");
    }
    gates_.push_back(std::move(g));
  }

  for (int a = 0; a < size; ++a) {
    for (int b = 0; b < size; ++b) {
      Unitary2 prod = gates_[static_cast<std::size_t>(a)].ideal *
                      gates_[static_cast<std::size_t>(b)].ideal;
      auto it = by_action.find(pauli_action(prod, 1e-8));
      if (it == by_action.end()) {
        throw std::logic_error("CliffordGroup: product escapes the group");
      }
      product_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = it->second;
      if (it->second == 1) inverse_[static_cast<std::size_t>(a)] = b + 1;
    }
  }
}

const CliffordGroup& clifford_group() {
  static const CliffordGroup instance;
  return instance;
}

std::vector<int> sample_sequence(int length, const RngStream& stream) {
  if (length < 0) throw std::invalid_argument("sample_sequence: negative length");
  std::vector<int> seq(static_cast<std::size_t>(length));
  for (int i = 0; i < length; ++i) {
    seq[static_cast<std::size_t>(i)] =
        static_cast<int>(stream.below(static_cast<std::uint64_t>(i), CliffordGroup::size)) + 1;
  }
  return seq;
}

int inversion_gate(const std::vector<int>& seq, bool target_one) {
  const CliffordGroup& group = clifford_group();
  int total = 1;
  for (int g : seq) total = group.compose(g, total);
  BlochState state = apply(group.gate(total).ideal, BlochState::ket0());
  for (int c = 1; c <= CliffordGroup::size; ++c) {
    BlochState out = apply(group.gate(c).ideal, state);
    double p = target_one ? std::norm(out.c1) : std::norm(out.c0);
    if (p > 0.99) return c;
  }
  throw std::logic_error("inversion_gate: no gate maps onto the target state");
}

CliffordAuditResult audit_clifford_table(int corrupt_gate, double corrupt_by) {
  CliffordAuditResult result;
  result.gate_ok.fill(true);
  auto rows = physical_table();
  if (corrupt_gate >= 1 && corrupt_gate <= static_cast<int>(rows.size())) {
    for (Pulse& p : rows[static_cast<std::size_t>(corrupt_gate - 1)].pulses) {
      if (p.kind == PulseKind::PhysicalDrive) {
        p.phi += corrupt_by;
        break;
      }
    }
  }

  auto fail = [&result](int gate, const std::string& what) {
    result.passed = false;
    if (gate >= 1) result.gate_ok[static_cast<std::size_t>(gate - 1)] = false;
    result.failures.push_back("gate " + std::to_string(gate) + ": " + what);
  };

  std::map<PauliAction, int> by_action;
  std::vector<Unitary2> ideals;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    int index = static_cast<int>(i) + 1;
    Unitary2 u = ideal_product(rows[i].pulses);
    ideals.push_back(u);
    bool ok = true;
    PauliAction act = pauli_action(u, 1e-10, &ok);
    if (!ok) {
      fail(index, "decomposition does not realize a Clifford (Pauli axes not preserved)");
      continue;
    }
    auto [it, inserted] = by_action.emplace(act, index);
    if (!inserted) fail(index, "duplicates gate " + std::to_string(it->second));
  }

  if (by_action.size() == rows.size()) {
    for (std::size_t a = 0; a < rows.size(); ++a) {
      bool has_inverse = false;
      for (std::size_t b = 0; b < rows.size(); ++b) {
        bool ok = true;
        PauliAction act = pauli_action(ideals[a] * ideals[b], 1e-8, &ok);
        auto it = ok ? by_action.find(act) : by_action.end();
        if (it == by_action.end()) {
          fail(static_cast<int>(a) + 1,
               "product with gate " + std::to_string(b + 1) + " escapes the group");
          continue;
        }
        if (it->second == 1) has_inverse = true;
      }
      if (!has_inverse) fail(static_cast<int>(a) + 1, "no inverse in the table");
    }
  }
  return result;
}

}  // namespace rbsim
