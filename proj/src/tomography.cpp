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

#include "memchan/tomography.hpp"

#include <cmath>

namespace memchan {

namespace {

// effect written as E = e0 I + e . sigma
struct EffectComponents {
  double e0;
  Vec3 e;
};

EffectComponents decompose_effect(const Mat2& effect) {
  EffectComponents c;
  c.e0 = 0.5 * effect.trace().real();
  for (int j = 0; j < 3; ++j) c.e[j] = 0.5 * (effect * pauli(j)).trace().real();
  return c;
}

}  // namespace

FrequencyTable FrequencyTable::from_probabilities(
    const Eigen::MatrixXd& probs, const Eigen::VectorXd& setting_weights) {
  FrequencyTable table;
  table.counts.setZero(probs.rows(), probs.cols());
  table.weights = setting_weights;
  table.freqs = probs;
  table.defined.assign(probs.rows(), true);
  return table;
}

FrequencyTable tally(const Dataset& dataset, std::size_t ensemble_size,
                     std::size_t povm_size) {
  FrequencyTable table;
  table.counts.setZero(ensemble_size, povm_size);
  for (const DatasetRecord& rec : dataset.records) {
    if (rec.setting_id < 0 || rec.setting_id >= static_cast<int>(ensemble_size))
      throw std::out_of_range("tally: setting id out of range");
    if (rec.outcome_id < 0 || rec.outcome_id >= static_cast<int>(povm_size))
      throw std::out_of_range("tally: outcome id out of range");
    ++table.counts(rec.setting_id, rec.outcome_id);
  }
  table.weights.resize(ensemble_size);
  table.freqs.setZero(ensemble_size, povm_size);
  table.defined.assign(ensemble_size, false);
  for (std::size_t x = 0; x < ensemble_size; ++x) {
    const double nx = static_cast<double>(table.counts.row(x).sum());
    table.weights(x) = nx;
    if (nx > 0) {
      table.defined[x] = true;
      table.freqs.row(x) = table.counts.row(x).cast<double>() / nx;
    }
  }
  return table;
}

BlochAffineMap reconstruct_single(const FrequencyTable& freqs,
                                  const TestEnsemble& ensemble, const Povm& povm) {
  const std::size_t n_settings = ensemble.size();
  const std::size_t n_outcomes = povm.size();
  if (static_cast<std::size_t>(freqs.freqs.rows()) != n_settings ||
      static_cast<std::size_t>(freqs.freqs.cols()) != n_outcomes) {
    throw std::invalid_argument("reconstruct_single: table shape mismatch");
  }

  std::vector<EffectComponents> effects;
  effects.reserve(n_outcomes);
  for (const Mat2& e : povm.effects) effects.push_back(decompose_effect(e));

  // unknowns: theta = (T row-major, t), 12 parameters
  Eigen::MatrixXd design(n_settings * n_outcomes, 12);
  Eigen::VectorXd rhs(n_settings * n_outcomes);
  std::size_t row = 0;
  for (std::size_t x = 0; x < n_settings; ++x) {
    if (!freqs.defined[x] || freqs.weights(x) <= 0.0) continue;
    const double w = std::sqrt(freqs.weights(x));
    const Vec3 rx = ensemble.entries[x].state.bloch;
    for (std::size_t k = 0; k < n_outcomes; ++k) {
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) design(row, 3 * i + j) = w * effects[k].e[i] * rx[j];
        design(row, 9 + i) = w * effects[k].e[i];
      }
      rhs(row) = w * (freqs.freqs(x, k) - effects[k].e0);
      ++row;
    }
  }
  design.conservativeResize(row, 12);
  rhs.conservativeResize(row);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-10);
  if (svd.rank() < 12) {
    throw IllPosedReconstruction(
        "reconstruct_single: ensemble/POVM pair is not informationally complete");
  }
  const Eigen::VectorXd theta = svd.solve(rhs);

  BlochAffineMap map;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) map.T(i, j) = theta(3 * i + j);
    map.t(i) = theta(9 + i);
  }
  return map;
}

FrequencyTable tally_conditional(const Dataset& dataset, std::size_t ensemble_size,
                                 std::size_t povm_size, int conditioning_setting) {
  Dataset pairs;
  for (std::size_t j = 0; j + 1 < dataset.records.size(); ++j) {
    const DatasetRecord& here = dataset.records[j];
    const DatasetRecord& next = dataset.records[j + 1];
    if (here.setting_id == conditioning_setting && next.step == here.step + 1) {
      pairs.records.push_back(next);
    }
  }
  return tally(pairs, ensemble_size, povm_size);
}

BlochAffineMap reconstruct_conditional(const Dataset& dataset,
                                       const TestEnsemble& ensemble, const Povm& povm,
                                       int conditioning_setting,
                                       std::int64_t min_pairs) {
  const FrequencyTable table =
      tally_conditional(dataset, ensemble.size(), povm.size(), conditioning_setting);
  const std::int64_t total = table.counts.sum();
  if (total < min_pairs) {
    throw IllPosedReconstruction(
        "reconstruct_conditional: insufficient consecutive pairs for setting " +
        std::to_string(conditioning_setting) + " (" + std::to_string(total) + ")");
  }
  return reconstruct_single(table, ensemble, povm);
}

double unitarity_score(const BlochAffineMap& map) {
  const double ortho = (map.T.transpose() * map.T - Mat3::Identity()).norm();
  const double det = std::abs(map.T.determinant() - 1.0);
  const double shift = map.t.norm();
  const double score = 1.0 - std::max({ortho, det, shift});
  return std::clamp(score, 0.0, 1.0);
}

}  // namespace memchan
