#ifndef RBSIM_CONFIG_HPP
#define RBSIM_CONFIG_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rbsim/rb.hpp"

namespace rbsim {

/// Config parse/validation failure; `path` points at the offending key
/// (e.g. "noise.offres.amp1").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path_in, const std::string& what)
      : std::runtime_error(path_in.empty() ? what : path_in + ": " + what),
        path(std::move(path_in)) {}
  std::string path;
};

/// The structured experiment document behind `rb run` / `rb sweep`. Physical
/// quantities carry units in their key names (omega_hz, delta_prime_hz, ...);
/// unknown keys are rejected. Frequencies are kept in Hz exactly as written so
/// dump/parse round-trips bit-for-bit; ratios are derived when building the
/// RBExperiment.
struct ExperimentConfig {
  int schema_version = 1;

  // experiment
  std::vector<int> lengths = {1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1000};
  int sequences_per_length = 20;
  int shots = 800;
  SchemeKind scheme = SchemeKind::Primitive;
  std::uint64_t seed = 0;
  MeasurementMode measurement = MeasurementMode::Sampled;
  bool expand_identity = false;
  bool physical_z = false;

  // noise
  double epsilon = 0.0;
  double omega_hz = 50e3;
  bool delta_uniform = false;
  double delta_max_hz = 0.0;   // uniform mode
  double delta_ratio = 0.0;    // fixed mode
  bool offres_enabled = false;
  double offres_amp1 = 2.0;
  double offres_amp2 = 1.0;
  double delta_prime_hz = 4.5e6;
  bool offres_resample_phases = true;
  double offres_phi1 = 0.0;
  double offres_phi2 = 0.0;

  // sweep
  std::vector<double> sweep_epsilons;
  std::vector<SchemeKind> sweep_schemes = {SchemeKind::Primitive, SchemeKind::B2,
                                           SchemeKind::PD6};
  int sweep_repeats = 1;

  // output
  std::string out_dir;  // empty: $RBSIM_OUT_DIR or "out"
  std::string prefix = "rb";

  RBExperiment to_experiment() const;
};

/// Parse a config document; throws ConfigError naming the offending field.
ExperimentConfig parse_config(const std::string& json_text);

/// Canonical JSON for --dump-config; parse_config(dump_config(c)) == c.
std::string dump_config(const ExperimentConfig& config);

}  // namespace rbsim

#endif
