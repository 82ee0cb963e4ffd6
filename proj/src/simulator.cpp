// Copyright 2026 The memchan developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "memchan/simulator.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace memchan {

namespace {

// Streams of the counter RNG; settings and outcomes are split so ordered and
// random modes stay comparable under one seed.
constexpr std::uint64_t kSettingsStream = 0;
constexpr std::uint64_t kOutcomesStream = 1;

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void append_double(std::string& buf, double v) {
  char tmp[32];
  std::snprintf(tmp, sizeof(tmp), "%.17g;", v);
  buf += tmp;
}

// Affine form of the instrument for one (setting, outcome) pair:
//   prob(xi)             = p0 + pv . r
//   prob * out_bloch(xi) = n0 + M r
struct AffineInstrument {
  double p0;
  Vec3 pv;
  Vec3 n0;
  Mat3 m;
};

std::vector<std::vector<AffineInstrument>> precompute_instruments(
    const ExperimentConfig& config) {
  const Mat4& u = config.interaction.matrix;
  std::vector<std::vector<AffineInstrument>> table(config.ensemble.size());
  for (std::size_t x = 0; x < config.ensemble.size(); ++x) {
    const Mat2 rho = config.ensemble.entries[x].state.density();
    for (std::size_t k = 0; k < config.povm.size(); ++k) {
      const Mat4 weight = kron22(identity2(), config.povm.effects[k]);
      auto component = [&](const Mat2& basis_op) {
        const Mat4 joint = u * kron22(basis_op, rho) * u.adjoint() * weight;
        return partial_trace_matrix(joint, Subsystem::kMemory);
      };
      const Mat2 g0 = component(0.5 * Mat2::Identity());
      AffineInstrument inst;
      inst.p0 = g0.trace().real();
      inst.n0 = density_to_bloch(g0);  // unnormalized Pauli components
      for (int j = 0; j < 3; ++j) {
        const Mat2 gj = component(0.5 * pauli(j));
        inst.pv[j] = gj.trace().real();
        inst.m.col(j) = density_to_bloch(gj);
      }
      table[x].push_back(inst);
    }
  }
  return table;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!interaction.is_unitary())
    throw std::invalid_argument("config: interaction is not unitary");
  if (!initial_memory.is_physical())
    throw std::invalid_argument("config: initial memory state is unphysical");
  if (!ensemble.is_valid())
    throw std::invalid_argument("config: invalid test ensemble");
  if (!povm.is_valid())
    throw std::invalid_argument("config: invalid POVM");
  if (n_steps < 1) throw std::invalid_argument("config: n_steps must be >= 1");
  if (mode == RunMode::kOrdered && block_size < 1)
    throw std::invalid_argument("config: block_size must be >= 1 in ordered mode");
}

std::uint64_t config_fingerprint(const ExperimentConfig& config) {
  std::string buf = "memchan-config-v1;";
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      append_double(buf, config.interaction.matrix(i, j).real());
      append_double(buf, config.interaction.matrix(i, j).imag());
    }
  for (int j = 0; j < 3; ++j) append_double(buf, config.initial_memory.bloch[j]);
  for (const auto& e : config.ensemble.entries) {
    append_double(buf, e.weight);
    for (int j = 0; j < 3; ++j) append_double(buf, e.state.bloch[j]);
  }
  for (const Mat2& eff : config.povm.effects)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        append_double(buf, eff(i, j).real());
        append_double(buf, eff(i, j).imag());
      }
  char tmp[96];
  std::snprintf(tmp, sizeof(tmp), "n=%" PRId64 ";seed=%" PRIu64 ";mode=%d;block=%" PRId64,
                config.n_steps, config.seed, static_cast<int>(config.mode),
                config.block_size);
  buf += tmp;
  return fnv1a(buf);
}

Dataset run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto instruments = precompute_instruments(config);
  const std::size_t n_settings = config.ensemble.size();
  const std::size_t n_outcomes = config.povm.size();

  std::vector<double> setting_cdf(n_settings);
  double acc = 0.0;
  for (std::size_t x = 0; x < n_settings; ++x) {
    acc += config.ensemble.entries[x].weight;
    setting_cdf[x] = acc;
  }

  CounterRng settings_rng(config.seed, kSettingsStream);
  CounterRng outcomes_rng(config.seed, kOutcomesStream);

  Dataset ds;
  ds.config_fingerprint = config_fingerprint(config);
  ds.records.reserve(config.n_steps);
  if (config.record_memory_trajectory) {
    ds.memory_trajectory.emplace();
    ds.memory_trajectory->reserve(config.n_steps);
  }

  Vec3 r = config.initial_memory.bloch;
  std::vector<double> probs(n_outcomes);
  for (std::int64_t step = 0; step < config.n_steps; ++step) {
    std::size_t x;
    if (config.mode == RunMode::kRandom) {
      const double ux = settings_rng.uniform();
      x = 0;
      while (x + 1 < n_settings && ux >= setting_cdf[x]) ++x;
    } else {
      x = static_cast<std::size_t>((step / config.block_size) % n_settings);
    }

    if (config.record_memory_trajectory) ds.memory_trajectory->push_back(r);

    // Born-rule outcome draw with memory back-action
    double total = 0.0;
    for (std::size_t k = 0; k < n_outcomes; ++k) {
      const AffineInstrument& inst = instruments[x][k];
      probs[k] = std::max(0.0, inst.p0 + inst.pv.dot(r));
      total += probs[k];
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw std::runtime_error("run_experiment: outcome probabilities do not sum to 1");
    }
    const double uk = outcomes_rng.uniform() * total;
    std::size_t k = 0;
    double cum = probs[0];
    while (k + 1 < n_outcomes && uk >= cum) cum += probs[++k];
    if (probs[k] < kProbFloor) {
      throw ZeroProbabilityBranch("run_experiment: sampled a zero-probability branch");
    }

    const AffineInstrument& inst = instruments[x][k];
    r = (inst.n0 + inst.m * r) / probs[k];
    ds.records.push_back({step, static_cast<int>(x), static_cast<int>(k)});
  }
  return ds;
}

void Dataset::write(std::ostream& os) const {
  os << "#memchan-dataset v1 " << config_fingerprint << "\n";
  for (const DatasetRecord& rec : records) {
    os << rec.step << ',' << rec.setting_id << ',' << rec.outcome_id << "\n";
  }
}

Dataset Dataset::read(std::istream& is) {
  Dataset ds;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("dataset: empty input");
  std::istringstream header(line);
  std::string tag, version;
  header >> tag >> version >> ds.config_fingerprint;
  if (tag != "#memchan-dataset" || version != "v1" || header.fail()) {
    throw std::runtime_error("dataset: bad header line");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    DatasetRecord rec;
    char c1 = 0, c2 = 0;
    std::istringstream row(line);
    row >> rec.step >> c1 >> rec.setting_id >> c2 >> rec.outcome_id;
    if (row.fail() || c1 != ',' || c2 != ',') {
      throw std::runtime_error("dataset: malformed record: " + line);
    }
    ds.records.push_back(rec);
  }
  return ds;
}

ExactStatistics exact_statistics(const TwoQubitUnitary& u, const QubitState& xi0,
                                 const TestEnsemble& ensemble, const Povm& povm) {
  const BlochAffineMap cmap = memory_map(u, ensemble);
  const FixedPointReport fp = fixed_points(cmap);

  ExactStatistics stats;
  if (fp.unique) {
    stats.xi_bar = fp.fixed_point;
  } else {
    stats.xi_bar = iterate_to_fixed_point(cmap, xi0).state;
    stats.initial_state_dependent = true;
  }

  stats.probs.resize(ensemble.size(), povm.size());
  for (std::size_t x = 0; x < ensemble.size(); ++x) {
    const Mat4 joint = apply_dilation(u, stats.xi_bar, ensemble.entries[x].state);
    for (std::size_t k = 0; k < povm.size(); ++k) {
      stats.probs(x, k) =
          (joint * kron22(identity2(), povm.effects[k])).trace().real();
    }
  }
  return stats;
}

}  // namespace memchan
