#ifndef RBSIM_RB_HPP
#define RBSIM_RB_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rbsim/noise.hpp"
#include "rbsim/pulse.hpp"
#include "rbsim/rng.hpp"

namespace rbsim {

enum class MeasurementMode { Sampled, ExactProbability };

/// A full randomized-benchmarking experiment specification. The record set it
/// produces is a pure function of this struct.
struct RBExperiment {
  std::vector<int> lengths;
  int sequences_per_length = 20;
  int shots = 800;
  CompensationScheme scheme = CompensationScheme::primitive();
  NoiseModel noise;
  std::uint64_t seed = 0;
  MeasurementMode measurement = MeasurementMode::Sampled;
  /// When set, the identity Clifford is driven through the compensation scheme
  /// as a theta=0 target instead of being skipped. Requires a PD6 phase-table
  /// entry for theta=0 under PD6.
  bool expand_identity = false;
  /// Realize Z-type gates as three physical pulses (an in-plane conjugation of
  /// an X rotation) instead of error-free frame updates.
  bool physical_z = false;

  /// Throws std::invalid_argument on malformed parameters (lengths not
  /// strictly increasing or < 1, fewer than 2 sequences per length, ...).
  void validate() const;
};

struct SequenceRecord {
  int length = 0;
  int sequence_id = 0;
  std::vector<int> clifford_indices;  // the L random draws; inversion separate
  int inversion_gate = 1;
  bool target_one = false;
  double delta_draw = 0.0;
  double survival = 0.0;
  int shots = 0;
};

/// Simulate one sequence: draw gates, target and noise from streams derived
/// from (seed, length, sequence_id), expand through the compensation scheme,
/// multiply noisy propagators in temporal order, and measure.
SequenceRecord run_sequence(const RBExperiment& experiment, int length, int sequence_id);

/// All |lengths| x sequences_per_length records, ordered by (length,
/// sequence_id). Records are evaluated in parallel over `threads` workers
/// (0 = hardware concurrency); the result is bit-identical for any count.
std::vector<SequenceRecord> run_experiment(const RBExperiment& experiment, int threads = 0);

/// Binomial survival draw: fraction of `shots` Bernoulli(p) successes, using
/// one counter-based uniform per shot.
double sample_survival(double p, int shots, const RngStream& shot_stream);

/// One row of an epsilon sweep; fit failures arrive as flagged rows.
struct SweepRow {
  double epsilon = 0.0;
  SchemeKind scheme = SchemeKind::Primitive;
  int repeat = 0;
  double avg_error = 0.0;
  double stderr_avg_error = 0.0;
  bool fit_converged = false;
  std::string flag;
};

/// Run and fit one experiment per (epsilon, scheme, repeat). Repeats use
/// sub-seeds derived from the base seed. Errors in individual fits produce
/// flagged rows rather than aborting the sweep.
std::vector<SweepRow> epsilon_sweep(const RBExperiment& base, const std::vector<double>& epsilons,
                                    const std::vector<SchemeKind>& schemes, int repeats = 1,
                                    int threads = 0);

/// Records CSV: header
///   L,sequence_id,scheme,epsilon,delta_draw,target,survival,shots
/// Doubles are emitted with %.17g so files round-trip exactly.
void write_records_csv(std::ostream& out, const RBExperiment& experiment,
                       const std::vector<SequenceRecord>& records);
void write_records_json(std::ostream& out, const RBExperiment& experiment,
                        const std::vector<SequenceRecord>& records);

/// Parse a records CSV produced by write_records_csv. Scheme and epsilon
/// columns must be uniform; they are returned through the out-parameters.
std::vector<SequenceRecord> read_records_csv(std::istream& in, SchemeKind* scheme_out = nullptr,
                                             double* epsilon_out = nullptr);

/// Parse the records JSON produced by write_records_json.
std::vector<SequenceRecord> read_records_json(std::istream& in, SchemeKind* scheme_out = nullptr,
                                              double* epsilon_out = nullptr);

/// Sweep CSV: header epsilon,scheme,repeat,avg_error,stderr,flag
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace rbsim

#endif
