#include "rbsim/su2.hpp"

#include <cmath>
#include <stdexcept>

namespace rbsim {

namespace {

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// Gram-Schmidt on the columns; enough to pull ~1e-6 drift back to ~1e-16.
Mat2 orthonormalize_columns(const Mat2& m) {
  cplx a0 = m.m00, a1 = m.m10;  // first column
  double n0 = std::sqrt(std::norm(a0) + std::norm(a1));
  if (n0 == 0.0) throw std::domain_error("orthonormalize: zero column");
  a0 /= n0;
  a1 /= n0;
  cplx b0 = m.m01, b1 = m.m11;  // second column
  cplx overlap = std::conj(a0) * b0 + std::conj(a1) * b1;
  b0 -= overlap * a0;
  b1 -= overlap * a1;
  double n1 = std::sqrt(std::norm(b0) + std::norm(b1));
  if (n1 == 0.0) throw std::domain_error("orthonormalize: degenerate columns");
  b0 /= n1;
  b1 /= n1;
  return {a0, b0, a1, b1};
}

}  // namespace

double Mat2::max_abs() const {
  return std::max(std::max(std::abs(m00), std::abs(m01)),
                  std::max(std::abs(m10), std::abs(m11)));
}

bool Mat2::is_finite() const {
  return finite(m00) && finite(m01) && finite(m10) && finite(m11);
}

double max_abs_diff(const Mat2& a, const Mat2& b) { return (a - b).max_abs(); }

double unitarity_defect(const Mat2& m) {
  return max_abs_diff(m * m.dagger(), Mat2::identity());
}

std::array<cplx, 4> pauli_components(const Mat2& m) {
  const cplx half{0.5, 0.0};
  const cplx mhalf_i{0.0, -0.5};
  return {(m.m00 + m.m11) * half, (m.m01 + m.m10) * half,
          (m.m10 - m.m01) * mhalf_i, (m.m00 - m.m11) * half};
}

Unitary2 Unitary2::from_matrix(const Mat2& m) {
  if (!m.is_finite()) throw std::domain_error("Unitary2: non-finite entries");
  double defect = unitarity_defect(m);
  if (defect > 1e-6) throw std::invalid_argument("Unitary2: matrix is not unitary");
  if (defect > 1e-10) return Unitary2(orthonormalize_columns(m));
  return Unitary2(m);
}

Unitary2 Unitary2::operator*(const Unitary2& o) const {
  Mat2 p = m_ * o.m_;
  if (unitarity_defect(p) > 1e-10) p = orthonormalize_columns(p);
  return Unitary2(p);
}

Unitary2 Unitary2::renormalized() const { return Unitary2(orthonormalize_columns(m_)); }

Unitary2 pauli_axis_unitary(double theta, const std::array<double, 3>& axis) {
  if (!std::isfinite(theta) || !std::isfinite(axis[0]) || !std::isfinite(axis[1]) ||
      !std::isfinite(axis[2])) {
    throw std::domain_error("pauli_axis_unitary: non-finite input");
  }
  double norm = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
  if (norm == 0.0) return Unitary2::identity();
  double half = 0.5 * theta * norm;
  double c = std::cos(half);
  double s = std::sin(half);
  double nx = axis[0] / norm, ny = axis[1] / norm, nz = axis[2] / norm;
  // cos(a/2) I - i sin(a/2) (n.sigma)
  return Unitary2(Mat2{{c, -s * nz},
                       {-s * ny, -s * nx},
                       {s * ny, -s * nx},
                       {c, s * nz}});
}

double fidelity(const Unitary2& u, const Unitary2& v) {
  cplx t = (u.matrix().dagger() * v.matrix()).trace();
  double f = 0.25 * std::norm(t);
  return f > 1.0 ? 1.0 : f;
}

AxisAngle rotation_axis_angle(const Unitary2& u) {
  auto [c0, cx, cy, cz] = pauli_components(u.matrix());
  // U = e^{i alpha} (cos(a/2) I - i sin(a/2) n.sigma). Strip the global phase by
  // rotating the identity component onto the positive real axis.
  cplx phase{1.0, 0.0};
  if (std::abs(c0) > 0.0) phase = std::conj(c0) / std::abs(c0);
  double cos_half = std::abs(c0);
  // with c0 rotated real-positive, the Pauli parts are -i sin(a/2) n_k
  double vx = -(phase * cx).imag();
  double vy = -(phase * cy).imag();
  double vz = -(phase * cz).imag();
  double sin_half = std::sqrt(vx * vx + vy * vy + vz * vz);
  if (sin_half < 1e-12) throw std::domain_error("rotation_axis_angle: axis undefined near ±I");
  double angle = 2.0 * std::atan2(sin_half, std::min(cos_half, 1.0));
  return {angle, {vx / sin_half, vy / sin_half, vz / sin_half}};
}

BlochState apply(const Unitary2& u, const BlochState& s) {
  const Mat2& m = u.matrix();
  BlochState out{m.m00 * s.c0 + m.m01 * s.c1, m.m10 * s.c0 + m.m11 * s.c1};
  double n2 = out.norm2();
  if (std::abs(n2 - 1.0) > 1e-12) {
    double inv = 1.0 / std::sqrt(n2);
    out.c0 *= inv;
    out.c1 *= inv;
  }
  return out;
}

}  // namespace rbsim
