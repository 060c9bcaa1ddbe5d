#ifndef RBSIM_SU2_HPP
#define RBSIM_SU2_HPP

#include <array>
#include <complex>

namespace rbsim {

using cplx = std::complex<double>;

/// 2x2 complex matrix, row-major. The workhorse value type for propagators.
struct Mat2 {
  cplx m00{0.0, 0.0};
  cplx m01{0.0, 0.0};
  cplx m10{0.0, 0.0};
  cplx m11{0.0, 0.0};

  static Mat2 identity() { return {{1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}}; }

  Mat2 operator*(const Mat2& o) const {
    return {m00 * o.m00 + m01 * o.m10, m00 * o.m01 + m01 * o.m11,
            m10 * o.m00 + m11 * o.m10, m10 * o.m01 + m11 * o.m11};
  }
  Mat2 operator+(const Mat2& o) const {
    return {m00 + o.m00, m01 + o.m01, m10 + o.m10, m11 + o.m11};
  }
  Mat2 operator-(const Mat2& o) const {
    return {m00 - o.m00, m01 - o.m01, m10 - o.m10, m11 - o.m11};
  }
  Mat2 operator*(cplx s) const { return {m00 * s, m01 * s, m10 * s, m11 * s}; }

  Mat2 dagger() const {
    return {std::conj(m00), std::conj(m10), std::conj(m01), std::conj(m11)};
  }
  cplx trace() const { return m00 + m11; }
  cplx det() const { return m00 * m11 - m01 * m10; }

  double max_abs() const;
  bool is_finite() const;
};

/// max-entry |a - b|
double max_abs_diff(const Mat2& a, const Mat2& b);

/// max-entry |U U† - I|
double unitarity_defect(const Mat2& m);

/// Decompose M = c0*I + cx*X + cy*Y + cz*Z; returns {c0, cx, cy, cz}.
std::array<cplx, 4> pauli_components(const Mat2& m);

/// A Mat2 kept unitary. Products re-orthonormalize (Gram-Schmidt on columns)
/// whenever the unitarity defect exceeds 1e-10, so chains of ~1e5 factors
/// stay unitary to 1e-12.
class Unitary2 {
 public:
  static Unitary2 identity() { return Unitary2(Mat2::identity()); }

  /// Validates unitarity; drift below 1e-6 is corrected, worse input throws.
  static Unitary2 from_matrix(const Mat2& m);

  const Mat2& matrix() const { return m_; }

  Unitary2 dagger() const { return Unitary2(m_.dagger()); }

  Unitary2 operator*(const Unitary2& o) const;

  /// Force a re-orthonormalization regardless of current defect.
  Unitary2 renormalized() const;

 private:
  friend Unitary2 pauli_axis_unitary(double, const std::array<double, 3>&);
  explicit Unitary2(Mat2 m) : m_(m) {}
  Mat2 m_;
};

/// exp(-i/2 * theta * axis.sigma): rotation by theta*|axis| about axis/|axis|.
/// Returns identity for a zero axis. Throws std::domain_error on non-finite input.
Unitary2 pauli_axis_unitary(double theta, const std::array<double, 3>& axis);

/// |Tr(U†V)|^2 / 4 — global-phase invariant, 1 iff U = V up to phase.
double fidelity(const Unitary2& u, const Unitary2& v);

/// Rotation angle in [0, 2pi) and unit axis of U modulo global phase,
/// i.e. U ~ exp(-i/2 * angle * axis.sigma). Throws std::domain_error when
/// U is within ~1e-12 of ±I (axis undefined).
struct AxisAngle {
  double angle;
  std::array<double, 3> axis;
};
AxisAngle rotation_axis_angle(const Unitary2& u);

/// Qubit pure state (c0, c1) on {|0>, |1>}.
struct BlochState {
  cplx c0{1.0, 0.0};
  cplx c1{0.0, 0.0};

  static BlochState ket0() { return {{1.0, 0.0}, {0.0, 0.0}}; }
  static BlochState ket1() { return {{0.0, 0.0}, {1.0, 0.0}}; }

  double norm2() const { return std::norm(c0) + std::norm(c1); }
};

/// U|s>, renormalized if the norm drifted by more than 1e-12.
BlochState apply(const Unitary2& u, const BlochState& s);

}  // namespace rbsim

#endif
