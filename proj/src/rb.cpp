#include "rbsim/rb.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "rbsim/clifford.hpp"
#include "rbsim/fit.hpp"

namespace rbsim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Stream-derivation words. A sequence's draws come from
//   RngStream(seed).child(kSeqDomain).child(L).child(sequence_id).child(purpose)
enum StreamWord : std::uint64_t {
  kSeqDomain = 1,
  kGates = 2,
  kTarget = 3,
  kDelta = 4,
  kPhases = 5,
  kShots = 6,
  kSweepRepeat = 7,
};

NoiseRealization draw_noise(const NoiseModel& m, const RngStream& base) {
  NoiseRealization r;
  if (m.delta.mode == DeltaSpec::Mode::Uniform) {
    r.delta = base.child(kDelta).uniform(0) * m.delta.max;
  } else {
    r.delta = m.delta.value;
  }
  if (m.offres.enabled) {
    if (m.offres.resample_phases) {
      RngStream s = base.child(kPhases);
      r.phi1 = kTwoPi * s.uniform(0);
      r.phi2 = kTwoPi * s.uniform(1);
    } else {
      r.phi1 = m.offres.phi1;
      r.phi2 = m.offres.phi2;
    }
  }
  return r;
}

// Noisy propagators for one sequence. Pulses repeat heavily across the 24
// gates, so both the expanded-target and whole-gate unitaries are memoized;
// keys compare exactly because repeated pulses are built by identical code
// paths.
class SequencePropagators {
 public:
  SequencePropagators(const RBExperiment& e, const NoiseRealization& r) : e_(e), r_(r) {}

  const Unitary2& gate(int index) {
    auto it = gates_.find(index);
    if (it != gates_.end()) return it->second;
    const CliffordGate& g = clifford_group().gate(index);
    Unitary2 u = Unitary2::identity();
    if (g.decomposition.empty() && e_.expand_identity) {
      u = target_product(Pulse::drive(0.0, 0.0));
    } else {
      for (const Pulse& p : g.decomposition) {
        for (const Pulse& t : realize(p)) u = target_product(t) * u;
      }
    }
    return gates_.emplace(index, u).first->second;
  }

 private:
  using Key = std::tuple<int, double, double>;

  // Z(theta) = Ry(-pi/2) X(theta) Ry(pi/2) when frame updates are disabled.
  std::vector<Pulse> realize(const Pulse& p) const {
    if (p.kind == PulseKind::FrameUpdate && e_.physical_z) {
      return {Pulse::drive(kPi_ / 2, kPi_ / 2), Pulse::drive(p.theta, 0.0),
              Pulse::drive(kPi_ / 2, 3 * kPi_ / 2)};
    }
    return {p};
  }

  static constexpr double kPi_ = std::numbers::pi;

  Unitary2 target_product(const Pulse& target) {
    Key key{static_cast<int>(target.kind), target.theta, target.phi};
    auto it = targets_.find(key);
    if (it != targets_.end()) return it->second;
    Unitary2 u = Unitary2::identity();
    for (const Pulse& p : expand(target, e_.scheme)) {
      u = pulse_propagator(p, e_.noise, r_) * u;
    }
    return targets_.emplace(key, u).first->second;
  }

  const RBExperiment& e_;
  const NoiseRealization& r_;
  std::map<Key, Unitary2> targets_;
  std::map<int, Unitary2> gates_;
};

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CompensationScheme scheme_for_kind(const RBExperiment& base, SchemeKind kind) {
  if (base.scheme.kind == kind) return base.scheme;
  switch (kind) {
    case SchemeKind::Primitive: return CompensationScheme::primitive();
    case SchemeKind::B2: return CompensationScheme::b2();
    case SchemeKind::PD6: return CompensationScheme::pd6();
  }
  throw std::logic_error("scheme_for_kind: bad enum");
}

}  // namespace

void RBExperiment::validate() const {
  if (lengths.empty()) throw std::invalid_argument("RBExperiment: lengths must be nonempty");
  int prev = 0;
  for (int l : lengths) {
    if (l < 1) throw std::invalid_argument("RBExperiment: lengths must be >= 1");
    if (l <= prev) throw std::invalid_argument("RBExperiment: lengths must be strictly increasing");
    prev = l;
  }
  if (sequences_per_length < 2) {
    throw std::invalid_argument("RBExperiment: sequences_per_length must be >= 2");
  }
  if (shots < 1) throw std::invalid_argument("RBExperiment: shots must be >= 1");
  noise.validate();
}

double sample_survival(double p, int shots, const RngStream& shot_stream) {
  int hits = 0;
  for (int s = 0; s < shots; ++s) {
    if (shot_stream.uniform(static_cast<std::uint64_t>(s)) < p) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(shots);
}

SequenceRecord run_sequence(const RBExperiment& experiment, int length, int sequence_id) {
  RngStream base = RngStream(experiment.seed)
                       .child(kSeqDomain)
                       .child(static_cast<std::uint64_t>(length))
                       .child(static_cast<std::uint64_t>(sequence_id));

  SequenceRecord rec;
  rec.length = length;
  rec.sequence_id = sequence_id;
  rec.shots = experiment.shots;
  rec.clifford_indices = sample_sequence(length, base.child(kGates));
  rec.target_one = base.child(kTarget).uniform(0) >= 0.5;
  rec.inversion_gate = inversion_gate(rec.clifford_indices, rec.target_one);

  NoiseRealization noise = draw_noise(experiment.noise, base);
  rec.delta_draw = noise.delta;

  SequencePropagators props(experiment, noise);
  Unitary2 u = Unitary2::identity();
  for (int g : rec.clifford_indices) u = props.gate(g) * u;
  u = props.gate(rec.inversion_gate) * u;

  BlochState out = apply(u, BlochState::ket0());
  double p = rec.target_one ? std::norm(out.c1) : std::norm(out.c0);

  rec.survival = experiment.measurement == MeasurementMode::Sampled
                     ? sample_survival(p, experiment.shots, base.child(kShots))
                     : p;
  return rec;
}

std::vector<SequenceRecord> run_experiment(const RBExperiment& experiment, int threads) {
  experiment.validate();

  struct Spec {
    int length;
    int sequence_id;
  };
  std::vector<Spec> specs;
  specs.reserve(experiment.lengths.size() *
                static_cast<std::size_t>(experiment.sequences_per_length));
  for (int l : experiment.lengths) {
    for (int s = 0; s < experiment.sequences_per_length; ++s) specs.push_back({l, s});
  }

  std::vector<SequenceRecord> records(specs.size());
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  threads = std::min<int>(threads, static_cast<int>(specs.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < specs.size(); ++i) {
      records[i] = run_sequence(experiment, specs[i].length, specs[i].sequence_id);
    }
    return records;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    try {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= specs.size()) return;
        records[i] = run_sequence(experiment, specs[i].length, specs[i].sequence_id);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return records;
}

std::vector<SweepRow> epsilon_sweep(const RBExperiment& base, const std::vector<double>& epsilons,
                                    const std::vector<SchemeKind>& schemes, int repeats,
                                    int threads) {
  if (repeats < 1) throw std::invalid_argument("epsilon_sweep: repeats must be >= 1");
  for (double eps : epsilons) {
    if (!(eps > -1.0)) throw std::invalid_argument("epsilon_sweep: epsilon must be > -1");
  }

  std::vector<SweepRow> rows;
  for (SchemeKind kind : schemes) {
    for (double eps : epsilons) {
      for (int rep = 0; rep < repeats; ++rep) {
        RBExperiment e = base;
        e.scheme = scheme_for_kind(base, kind);
        e.noise.epsilon = eps;
        e.seed = RngStream(base.seed)
                     .child(kSweepRepeat)
                     .child(static_cast<std::uint64_t>(rep))
                     .bits(0);

        SweepRow row;
        row.epsilon = eps;
        row.scheme = kind;
        row.repeat = rep;
        try {
          DecayFit fit = fit_decay(aggregate(run_experiment(e, threads)));
          row.avg_error = fit.avg_error;
          row.stderr_avg_error = fit.stderr_avg_error;
          row.fit_converged = fit.converged;
          if (!fit.converged && row.flag.empty()) row.flag = "fit-not-converged";
          for (const auto& f : fit.flags) {
            if (!row.flag.empty()) row.flag += ';';
            row.flag += f;
          }
        } catch (const std::exception& ex) {
          row.avg_error = std::nan("");
          row.stderr_avg_error = std::nan("");
          row.fit_converged = false;
          row.flag = ex.what();
        }
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

void write_records_csv(std::ostream& out, const RBExperiment& experiment,
                       const std::vector<SequenceRecord>& records) {
  out << "L,sequence_id,scheme,epsilon,delta_draw,target,survival,shots\n";
  const std::string scheme = scheme_name(experiment.scheme.kind);
  const std::string eps = fmt_double(experiment.noise.epsilon);
  for (const SequenceRecord& r : records) {
    out << r.length << ',' << r.sequence_id << ',' << scheme << ',' << eps << ','
        << fmt_double(r.delta_draw) << ',' << (r.target_one ? 1 : 0) << ','
        << fmt_double(r.survival) << ',' << r.shots << '\n';
  }
}

void write_records_json(std::ostream& out, const RBExperiment& experiment,
                        const std::vector<SequenceRecord>& records) {
  nlohmann::json j;
  j["scheme"] = scheme_name(experiment.scheme.kind);
  j["epsilon"] = experiment.noise.epsilon;
  j["records"] = nlohmann::json::array();
  for (const SequenceRecord& r : records) {
    j["records"].push_back({{"L", r.length},
                            {"sequence_id", r.sequence_id},
                            {"clifford_indices", r.clifford_indices},
                            {"inversion_gate", r.inversion_gate},
                            {"target", r.target_one ? 1 : 0},
                            {"delta_draw", r.delta_draw},
                            {"survival", r.survival},
                            {"shots", r.shots}});
  }
  out << j.dump(2) << '\n';
}

std::vector<SequenceRecord> read_records_csv(std::istream& in, SchemeKind* scheme_out,
                                             double* epsilon_out) {
  std::string line;
  if (!std::getline(in, line) ||
      line != "L,sequence_id,scheme,epsilon,delta_draw,target,survival,shots") {
    throw std::invalid_argument("records CSV: bad or missing header");
  }
  std::vector<SequenceRecord> records;
  bool first = true;
  std::string scheme_seen;
  double eps_seen = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 8) throw std::invalid_argument("records CSV: bad row: " + line);
    SequenceRecord r;
    r.length = std::stoi(fields[0]);
    r.sequence_id = std::stoi(fields[1]);
    double eps = std::stod(fields[3]);
    r.delta_draw = std::stod(fields[4]);
    r.target_one = fields[5] == "1";
    r.survival = std::stod(fields[6]);
    r.shots = std::stoi(fields[7]);
    if (first) {
      scheme_seen = fields[2];
      eps_seen = eps;
      first = false;
    } else if (fields[2] != scheme_seen || eps != eps_seen) {
      throw std::invalid_argument("records CSV: mixed scheme or epsilon");
    }
    records.push_back(std::move(r));
  }
  if (first) throw std::invalid_argument("records CSV: no data rows");
  if (scheme_out) *scheme_out = scheme_from_name(scheme_seen);
  if (epsilon_out) *epsilon_out = eps_seen;
  return records;
}

std::vector<SequenceRecord> read_records_json(std::istream& in, SchemeKind* scheme_out,
                                              double* epsilon_out) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("records JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("records") || !j["records"].is_array()) {
    throw std::invalid_argument("records JSON: missing records array");
  }
  std::vector<SequenceRecord> records;
  try {
    for (const auto& item : j["records"]) {
      SequenceRecord r;
      r.length = item.at("L").get<int>();
      r.sequence_id = item.at("sequence_id").get<int>();
      r.clifford_indices = item.at("clifford_indices").get<std::vector<int>>();
      r.inversion_gate = item.at("inversion_gate").get<int>();
      r.target_one = item.at("target").get<int>() == 1;
      r.delta_draw = item.at("delta_draw").get<double>();
      r.survival = item.at("survival").get<double>();
      r.shots = item.at("shots").get<int>();
      records.push_back(std::move(r));
    }
    if (scheme_out) *scheme_out = scheme_from_name(j.at("scheme").get<std::string>());
    if (epsilon_out) *epsilon_out = j.at("epsilon").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("records JSON: ") + e.what());
  }
  if (records.empty()) throw std::invalid_argument("records JSON: no records");
  return records;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "epsilon,scheme,repeat,avg_error,stderr,flag\n";
  for (const SweepRow& r : rows) {
    out << fmt_double(r.epsilon) << ',' << scheme_name(r.scheme) << ',' << r.repeat << ','
        << fmt_double(r.avg_error) << ',' << fmt_double(r.stderr_avg_error) << ',' << r.flag
        << '\n';
  }
}

}  // namespace rbsim
