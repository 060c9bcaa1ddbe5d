#include "rbsim/config.hpp"

#include <numbers>
#include <set>

#include <json.hpp>

namespace rbsim {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& path,
                  const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.contains(key)) {
      throw ConfigError(path.empty() ? key : path + "." + key, "unknown key");
    }
  }
}

const json* get(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

template <typename T>
void read(const json& obj, const std::string& path, const std::string& key, T& out) {
  if (const json* v = get(obj, key)) {
    try {
      out = v->get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path.empty() ? key : path + "." + key, "wrong type");
    }
  }
}

SchemeKind read_scheme(const json& v, const std::string& path) {
  try {
    return scheme_from_name(v.get<std::string>());
  } catch (const std::exception& e) {
    throw ConfigError(path, e.what());
  }
}

}  // namespace

RBExperiment ExperimentConfig::to_experiment() const {
  RBExperiment e;
  e.lengths = lengths;
  e.sequences_per_length = sequences_per_length;
  e.shots = shots;
  switch (scheme) {
    case SchemeKind::Primitive: e.scheme = CompensationScheme::primitive(); break;
    case SchemeKind::B2: e.scheme = CompensationScheme::b2(); break;
    case SchemeKind::PD6: e.scheme = CompensationScheme::pd6(); break;
  }
  e.seed = seed;
  e.measurement = measurement;
  e.expand_identity = expand_identity;
  e.physical_z = physical_z;
  e.noise.epsilon = epsilon;
  e.noise.omega = 2.0 * std::numbers::pi * omega_hz;
  e.noise.delta = delta_uniform ? DeltaSpec::uniform(delta_max_hz / omega_hz)
                                : DeltaSpec::fixed(delta_ratio);
  e.noise.offres.enabled = offres_enabled;
  e.noise.offres.amp1 = offres_amp1;
  e.noise.offres.amp2 = offres_amp2;
  e.noise.offres.delta_prime_ratio = delta_prime_hz / omega_hz;
  e.noise.offres.resample_phases = offres_resample_phases;
  e.noise.offres.phi1 = offres_phi1;
  e.noise.offres.phi2 = offres_phi2;
  return e;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("", "config must be a JSON object");

  ExperimentConfig c;
  require_keys(root, "", {"schema_version", "experiment", "noise", "sweep", "output"});
  if (!get(root, "schema_version")) throw ConfigError("schema_version", "missing");
  read(root, "", "schema_version", c.schema_version);
  if (c.schema_version != 1) throw ConfigError("schema_version", "unsupported version");

  if (const json* exp = get(root, "experiment")) {
    if (!exp->is_object()) throw ConfigError("experiment", "must be an object");
    require_keys(*exp, "experiment",
                 {"lengths", "sequences_per_length", "shots", "scheme", "seed",
                  "measurement_mode", "expand_identity", "physical_z"});
    read(*exp, "experiment", "lengths", c.lengths);
    read(*exp, "experiment", "sequences_per_length", c.sequences_per_length);
    read(*exp, "experiment", "shots", c.shots);
    if (const json* v = get(*exp, "scheme")) c.scheme = read_scheme(*v, "experiment.scheme");
    read(*exp, "experiment", "seed", c.seed);
    if (get(*exp, "measurement_mode")) {
      std::string mode;
      read(*exp, "experiment", "measurement_mode", mode);
      if (mode == "sampled") {
        c.measurement = MeasurementMode::Sampled;
      } else if (mode == "exact") {
        c.measurement = MeasurementMode::ExactProbability;
      } else {
        throw ConfigError("experiment.measurement_mode", "must be \"sampled\" or \"exact\"");
      }
    }
    read(*exp, "experiment", "expand_identity", c.expand_identity);
    read(*exp, "experiment", "physical_z", c.physical_z);
  }

  if (const json* noise = get(root, "noise")) {
    if (!noise->is_object()) throw ConfigError("noise", "must be an object");
    require_keys(*noise, "noise", {"epsilon", "omega_hz", "delta", "offres"});
    read(*noise, "noise", "epsilon", c.epsilon);
    read(*noise, "noise", "omega_hz", c.omega_hz);
    if (!(c.omega_hz > 0.0)) throw ConfigError("noise.omega_hz", "must be positive");
    if (const json* delta = get(*noise, "delta")) {
      if (!delta->is_object()) throw ConfigError("noise.delta", "must be an object");
      require_keys(*delta, "noise.delta", {"mode", "max_hz", "ratio"});
      std::string mode = "fixed";
      read(*delta, "noise.delta", "mode", mode);
      if (mode == "uniform") {
        c.delta_uniform = true;
      } else if (mode == "fixed") {
        c.delta_uniform = false;
      } else {
        throw ConfigError("noise.delta.mode", "must be \"fixed\" or \"uniform\"");
      }
      read(*delta, "noise.delta", "max_hz", c.delta_max_hz);
      read(*delta, "noise.delta", "ratio", c.delta_ratio);
      if (c.delta_uniform && c.delta_max_hz < 0.0) {
        throw ConfigError("noise.delta.max_hz", "must be >= 0");
      }
    }
    if (const json* off = get(*noise, "offres")) {
      if (!off->is_object()) throw ConfigError("noise.offres", "must be an object");
      require_keys(*off, "noise.offres",
                   {"enabled", "amp1", "amp2", "delta_prime_hz", "phases", "phi1", "phi2"});
      read(*off, "noise.offres", "enabled", c.offres_enabled);
      read(*off, "noise.offres", "amp1", c.offres_amp1);
      read(*off, "noise.offres", "amp2", c.offres_amp2);
      read(*off, "noise.offres", "delta_prime_hz", c.delta_prime_hz);
      if (get(*off, "phases")) {
        std::string phases;
        read(*off, "noise.offres", "phases", phases);
        if (phases == "resample") {
          c.offres_resample_phases = true;
        } else if (phases == "fixed") {
          c.offres_resample_phases = false;
        } else {
          throw ConfigError("noise.offres.phases", "must be \"resample\" or \"fixed\"");
        }
      }
      read(*off, "noise.offres", "phi1", c.offres_phi1);
      read(*off, "noise.offres", "phi2", c.offres_phi2);
      if (c.offres_enabled && c.delta_prime_hz == 0.0) {
        throw ConfigError("noise.offres.delta_prime_hz", "must be nonzero when enabled");
      }
    }
  }

  if (const json* sweep = get(root, "sweep")) {
    if (!sweep->is_object()) throw ConfigError("sweep", "must be an object");
    require_keys(*sweep, "sweep", {"epsilons", "schemes", "repeats"});
    read(*sweep, "sweep", "epsilons", c.sweep_epsilons);
    if (const json* v = get(*sweep, "schemes")) {
      if (!v->is_array()) throw ConfigError("sweep.schemes", "must be an array");
      c.sweep_schemes.clear();
      for (const auto& s : *v) c.sweep_schemes.push_back(read_scheme(s, "sweep.schemes"));
    }
    read(*sweep, "sweep", "repeats", c.sweep_repeats);
    if (c.sweep_repeats < 1) throw ConfigError("sweep.repeats", "must be >= 1");
  }

  if (const json* output = get(root, "output")) {
    if (!output->is_object()) throw ConfigError("output", "must be an object");
    require_keys(*output, "output", {"dir", "prefix"});
    read(*output, "output", "dir", c.out_dir);
    read(*output, "output", "prefix", c.prefix);
  }

  // Surface experiment-shape errors with config paths attached.
  try {
    c.to_experiment().validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("experiment", e.what());
  }
  return c;
}

std::string dump_config(const ExperimentConfig& c) {
  json root;
  root["schema_version"] = c.schema_version;
  root["experiment"] = {
      {"lengths", c.lengths},
      {"sequences_per_length", c.sequences_per_length},
      {"shots", c.shots},
      {"scheme", scheme_name(c.scheme)},
      {"seed", c.seed},
      {"measurement_mode",
       c.measurement == MeasurementMode::Sampled ? "sampled" : "exact"},
      {"expand_identity", c.expand_identity},
      {"physical_z", c.physical_z},
  };
  root["noise"] = {
      {"epsilon", c.epsilon},
      {"omega_hz", c.omega_hz},
      {"delta",
       {{"mode", c.delta_uniform ? "uniform" : "fixed"},
        {"max_hz", c.delta_max_hz},
        {"ratio", c.delta_ratio}}},
      {"offres",
       {{"enabled", c.offres_enabled},
        {"amp1", c.offres_amp1},
        {"amp2", c.offres_amp2},
        {"delta_prime_hz", c.delta_prime_hz},
        {"phases", c.offres_resample_phases ? "resample" : "fixed"},
        {"phi1", c.offres_phi1},
        {"phi2", c.offres_phi2}}},
  };
  json schemes = json::array();
  for (SchemeKind s : c.sweep_schemes) schemes.push_back(scheme_name(s));
  root["sweep"] = {
      {"epsilons", c.sweep_epsilons}, {"schemes", schemes}, {"repeats", c.sweep_repeats}};
  root["output"] = {{"dir", c.out_dir}, {"prefix", c.prefix}};
  return root.dump(2);
}

}  // namespace rbsim
