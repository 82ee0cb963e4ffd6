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

#ifndef MEMCHAN_CONFIG_HPP
#define MEMCHAN_CONFIG_HPP

#include <iosfwd>
#include <map>
#include <string>

#include "memchan/recovery.hpp"
#include "memchan/simulator.hpp"

namespace memchan {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key = value text. '#' starts a comment; keys are dotted paths.
//
//   interaction.preset      identity | delay-swap | controlled-not |
//                           controlled-z | random-regular
//   interaction.seed        rng seed for random-regular (default: run.seed)
//   interaction.alpha       ax,ay,az          (explicit interaction instead
//   interaction.local.w2    nx,ny,nz,theta     of a preset; locals are
//   interaction.local.v2    nx,ny,nz,theta     exp(-i theta/2 n.sigma),
//   interaction.local.v1    nx,ny,nz,theta     defaulting to the identity)
//   memory.bloch            x,y,z             (default 0,0,0)
//   ensemble.preset         pauli-six
//   povm.preset             tetrahedral
//   run.n_steps             integer >= 1
//   run.seed                integer >= 0
//   run.mode                random | ordered
//   run.block_size          integer >= 1      (ordered mode)
//   run.record_trajectory   0 | 1
//   thresholds.unitary_threshold, thresholds.t_unital_tol,
//   thresholds.noise_scale, thresholds.degenerate_tol, thresholds.s_min,
//   thresholds.m_min, thresholds.min_pairs, thresholds.refine
struct AppConfig {
  ExperimentConfig experiment;
  RecoverySettings recovery;
  std::string preset;  // empty for explicit interactions
  std::optional<CartanParams> explicit_params;  // as given in the config

  // The configured interaction doubles as the ground truth for reports.
  const TwoQubitUnitary& ground_truth() const { return experiment.interaction; }
};

// Throws ConfigError with the offending key path in the message.
AppConfig parse_config(std::istream& is);
AppConfig load_config(const std::string& path);

// Key-value pairs without structural interpretation (exposed for tooling).
std::map<std::string, std::string> parse_key_values(std::istream& is);

// Ready-made configs; seed feeds both the run and (for random-regular) the
// interaction draw.
AppConfig preset_config(const std::string& name, std::uint64_t seed);

// Canonical text form; parse_config(round trip) reproduces the experiment.
void write_config(std::ostream& os, const AppConfig& config);

}  // namespace memchan

#endif  // MEMCHAN_CONFIG_HPP
