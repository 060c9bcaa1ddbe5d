#ifndef RBSIM_FIT_HPP
#define RBSIM_FIT_HPP

#include <array>
#include <string>
#include <vector>

#include "rbsim/rb.hpp"

namespace rbsim {

/// Per-length average with an upper-bound-style variance: inter-sequence
/// sample variance of survivals / n plus the binomial shot term
/// mean(1-mean)/(shots*n).
struct LengthAggregate {
  int length = 0;
  double mean_survival = 0.0;
  double variance_bound = 0.0;
  int n_sequences = 0;
  int shots = 0;
};

/// Group records by length. Throws std::invalid_argument if any length has
/// fewer than 2 sequences. Output is sorted by length and independent of the
/// record order.
std::vector<LengthAggregate> aggregate(const std::vector<SequenceRecord>& records);

/// Result of the two-pass decay fit F(L) = A0 p^L + B0.
struct DecayFit {
  double a0 = 0.0;
  double b0 = 0.0;
  double p = 0.0;
  double avg_error = 0.0;         // (1 - p) / 2
  double stderr_avg_error = 0.0;  // sqrt(cov_pp) / 2
  std::array<std::array<double, 3>, 3> covariance{};  // (a0, b0, p) order
  bool converged = false;
  std::vector<std::string> flags;
  /// Floored per-point variances used as 1/weight, sorted by length.
  std::vector<double> point_variances;
};

/// Two-pass fit: pass 1 fits p alone, unweighted, with (A0, B0) frozen at the
/// SPAM estimates; pass 2 floats all three parameters weighted by
/// 1/variance_bound (bounds floored by the pass-1 residual scale so degenerate
/// aggregates cannot acquire infinite weight). p is optimized through a
/// logistic transform to stay inside (0, 1); the covariance is mapped back to
/// p-space by the delta method. Throws std::invalid_argument with fewer than
/// 4 distinct lengths. Non-convergence is reported through `converged` and
/// `flags`, not an exception.
DecayFit fit_decay(const std::vector<LengthAggregate>& aggregates, double spam_a0 = 0.47,
                   double spam_b0 = 0.517);

/// Fit report serialization (JSON): {A0, B0, p, avg_error, stderr, covariance,
/// per-L residuals}.
std::string fit_report_json(const DecayFit& fit, const std::vector<LengthAggregate>& aggregates);

}  // namespace rbsim

#endif
