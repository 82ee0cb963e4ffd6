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

#ifndef MEMCHAN_TOMOGRAPHY_HPP
#define MEMCHAN_TOMOGRAPHY_HPP

#include "memchan/qcore.hpp"
#include "memchan/simulator.hpp"

namespace memchan {

struct FrequencyTable {
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;  // N_xk
  Eigen::VectorXd weights;        // N_x (setting weights in the least squares)
  Eigen::MatrixXd freqs;          // p~(k|x); rows with weight 0 are undefined
  std::vector<bool> defined;      // per-setting: any data present

  // Exact-probability table (infinite-data limit): freqs = probs, weights = q_x.
  static FrequencyTable from_probabilities(const Eigen::MatrixXd& probs,
                                           const Eigen::VectorXd& setting_weights);
};

// Exact integer tallies of (setting, outcome) events.
// Throws std::out_of_range for ids outside the declared ranges.
FrequencyTable tally(const Dataset& dataset, std::size_t ensemble_size,
                     std::size_t povm_size);

struct IllPosedReconstruction : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Weighted linear inversion of p(k|x) = tr{E_k E[rho_x]} over all defined
// (x, k); minimizes sum_x N_x (p~(k|x) - model)^2.
BlochAffineMap reconstruct_single(const FrequencyTable& freqs,
                                  const TestEnsemble& ensemble, const Povm& povm);

// Tally restricted to steps immediately following an occurrence of the
// conditioning setting; estimates the channel on the next input.
FrequencyTable tally_conditional(const Dataset& dataset, std::size_t ensemble_size,
                                 std::size_t povm_size, int conditioning_setting);

// Throws IllPosedReconstruction when fewer than min_pairs consecutive pairs
// with the conditioning setting exist.
BlochAffineMap reconstruct_conditional(const Dataset& dataset,
                                       const TestEnsemble& ensemble, const Povm& povm,
                                       int conditioning_setting,
                                       std::int64_t min_pairs = 1000);

// 1 - max(||T^T T - I||_F, |det T - 1|, ||t||), clamped to [0, 1];
// equals 1 exactly for rotations with t = 0.
double unitarity_score(const BlochAffineMap& map);

}  // namespace memchan

#endif  // MEMCHAN_TOMOGRAPHY_HPP
