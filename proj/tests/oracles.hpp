// Test-only reference implementations, kept independent of the library's
// computation paths.
#ifndef RBSIM_TESTS_ORACLES_HPP
#define RBSIM_TESTS_ORACLES_HPP

#include <cmath>
#include <complex>
#include <vector>

#include "rbsim/pulse.hpp"
#include "rbsim/su2.hpp"

namespace oracles {

// Matrix exponential by scaling-and-squaring with a truncated Taylor series.
inline rbsim::Mat2 expm(const rbsim::Mat2& m) {
  using rbsim::Mat2;
  double scale = m.max_abs();
  int squarings = 0;
  Mat2 a = m;
  while (scale > 0.25) {
    scale *= 0.5;
    ++squarings;
  }
  double factor = std::ldexp(1.0, -squarings);
  a = a * rbsim::cplx{factor, 0.0};
  Mat2 sum = Mat2::identity();
  Mat2 term = Mat2::identity();
  for (int k = 1; k <= 16; ++k) {
    term = term * a * rbsim::cplx{1.0 / k, 0.0};
    sum = sum + term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

// exp(-i/2 theta (nx X + ny Y + nz Z)) through the series route.
inline rbsim::Mat2 expm_pauli(double theta, double nx, double ny, double nz) {
  using rbsim::cplx;
  cplx h{0.0, -0.5 * theta};
  rbsim::Mat2 gen{h * cplx{nz, 0.0}, h * cplx{nx, -ny}, h * cplx{nx, ny}, h * cplx{-nz, 0.0}};
  return expm(gen);
}

// Long-double 2x2 chain for measuring infidelities down to ~1e-17.
using lcplx = std::complex<long double>;
struct LMat {
  lcplx a, b, c, d;
  LMat operator*(const LMat& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
};

inline LMat lrot(long double theta, long double phi) {
  long double h = theta / 2.0L;
  return {lcplx(std::cos(h), 0.0L), lcplx(-std::sin(phi), -std::cos(phi)) * std::sin(h),
          lcplx(std::sin(phi), -std::cos(phi)) * std::sin(h), lcplx(std::cos(h), 0.0L)};
}

// 1 - |Tr(target† product)|^2/4 with every pulse area scaled by (1+eps).
inline long double sequence_infidelity(const rbsim::PulseSequence& seq, long double eps,
                                       long double theta_t, long double phi_t) {
  LMat u{1.0L, 0.0L, 0.0L, 1.0L};
  for (const rbsim::Pulse& p : seq) {
    u = lrot(static_cast<long double>(p.theta) * (1.0L + eps),
             static_cast<long double>(p.phi)) *
        u;
  }
  LMat t = lrot(theta_t, phi_t);
  lcplx tr = std::conj(t.a) * u.a + std::conj(t.c) * u.c + std::conj(t.b) * u.b +
             std::conj(t.d) * u.d;
  long double f = std::norm(tr) / 4.0L;
  return f > 1.0L ? 0.0L : 1.0L - f;
}

// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  auto n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double lx = std::log(x[i]);
    double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracles

#endif
