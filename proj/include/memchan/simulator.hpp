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

#ifndef MEMCHAN_SIMULATOR_HPP
#define MEMCHAN_SIMULATOR_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "memchan/fixedpoint.hpp"
#include "memchan/qcore.hpp"

namespace memchan {

// Counter-based generator (splitmix64 over a keyed counter). Streams with
// different ids are independent; identical (seed, stream, counter) triples
// give identical values on every platform.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(mix(seed ^ mix(stream + 0x9e3779b97f4a7c15ULL))) {}

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL); }

  // uniform double in [0, 1) with 53 significant bits
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

enum class RunMode { kRandom, kOrdered };

struct ExperimentConfig {
  TwoQubitUnitary interaction;
  QubitState initial_memory = QubitState::maximally_mixed();
  TestEnsemble ensemble = TestEnsemble::pauli_six();
  Povm povm = Povm::tetrahedral();
  std::int64_t n_steps = 1;
  std::uint64_t seed = 0;
  RunMode mode = RunMode::kRandom;
  std::int64_t block_size = 1;              // ordered mode only
  bool record_memory_trajectory = false;    // oracle/debug only

  void validate() const;  // throws std::invalid_argument
};

struct DatasetRecord {
  std::int64_t step;
  int setting_id;
  int outcome_id;
};

struct Dataset {
  std::vector<DatasetRecord> records;
  std::uint64_t config_fingerprint = 0;
  std::optional<std::vector<Vec3>> memory_trajectory;

  // line format: header "#memchan-dataset v1 <fingerprint>" then
  // "step,setting_id,outcome_id" per record, base 10
  void write(std::ostream& os) const;
  static Dataset read(std::istream& is);  // throws std::runtime_error on bad input
};

std::uint64_t config_fingerprint(const ExperimentConfig& config);

Dataset run_experiment(const ExperimentConfig& config);

struct ExactStatistics {
  QubitState xi_bar;                 // fixed point of the memory map
  Eigen::MatrixXd probs;             // p(k|x), settings x outcomes
  bool initial_state_dependent = false;  // set when the fixed point is not unique
};

// Long-run limit statistics computed without sampling: the memory map is
// solved for its fixed point (iterating from xi0 when non-unique) and outcome
// probabilities evaluated at it.
ExactStatistics exact_statistics(const TwoQubitUnitary& u, const QubitState& xi0,
                                 const TestEnsemble& ensemble, const Povm& povm);

}  // namespace memchan

#endif  // MEMCHAN_SIMULATOR_HPP
