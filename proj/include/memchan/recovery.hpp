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

#ifndef MEMCHAN_RECOVERY_HPP
#define MEMCHAN_RECOVERY_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "memchan/cartan.hpp"
#include "memchan/tomography.hpp"

namespace memchan {

struct PipelineError : std::runtime_error {
  PipelineError(std::string stage_name, const std::string& message,
                double residual_value = 0.0)
      : std::runtime_error(stage_name + ": " + message),
        stage(std::move(stage_name)),
        residual(residual_value) {}
  std::string stage;
  double residual;
};

struct RecoverySettings {
  double unitary_threshold = 0.9;   // controlled-branch decision on E1
  double t_unital_tol = 0.02;       // ||t|| bound (times noise scale) on E1
  double noise_scale = 1.0;         // widens tolerances for sampled data
  double degenerate_tol = 1e-3;     // cosine/sine product floor
  double s_min = 0.05;              // smallest sin alpha_i for O2 recovery
  double m_min = 0.05;              // smallest |m_z| for the sign of alpha_z
  std::int64_t min_pairs = 1000;    // conditional reconstruction floor
  bool refine = true;               // re-fit all parameters to the channel family
};

struct SplitSvd {
  Mat3 r2;
  Vec3 cdiag;  // nonnegative, descending; associated to axes (x, y, z)
  Mat3 r1;
};

// E1 = R2 diag(c) R1 with proper rotations; sign flips applied in pairs.
SplitSvd split_svd(const BlochAffineMap& e1, const RecoverySettings& settings = {});

struct AlphaEstimate {
  Vec3 alpha_abs;   // |alpha| per axis, in [0, pi/2]
  bool degenerate = false;  // some product at/below degenerate_tol
};

// Inverts (c2 c3, c1 c3, c1 c2) -> (|alpha_x|, |alpha_y|, |alpha_z|).
AlphaEstimate alpha_from_products(const Vec3& cdiag,
                                  const RecoverySettings& settings = {});

struct ConditionalChannel {
  Vec3 r1;             // Bloch vector of the conditioning test state
  BlochAffineMap map;  // channel on the following input
};

enum class SignOfAlphaZ { kPlus, kMinus, kUndetermined };

struct MemoryLocal {
  Mat3 o2;                   // rotation of W2
  SignOfAlphaZ sign_alpha_z = SignOfAlphaZ::kUndetermined;
  bool partial = false;      // some direction unrecoverable (sin alpha ~ 0)
  double fit_residual = 0.0;
};

// Solves t = R2 S O2 S R1 r1 over >= 3 conditioning states and reads the sign
// of alpha_z from the F matrix of the conditional channel.
MemoryLocal recover_memory_local(const std::vector<ConditionalChannel>& cond_maps,
                                 const Mat3& r1, const Mat3& r2,
                                 const Vec3& alpha_abs,
                                 const RecoverySettings& settings = {});

struct ControlledObservation {
  Mat2 observed_unitary;   // the branch V_l realized in this run
  double score = 0.0;
};

// Controlled-unitary branch: the estimated single-use channel is (close to) a
// unitary channel; only the realized branch is identifiable from one run.
ControlledObservation classify_and_extract_controlled(
    const BlochAffineMap& e1, const RecoverySettings& settings = {});

struct RecoveryDiagnostics {
  double unitarity = 0.0;
  double svd_residual = 0.0;
  double conditional_residual = 0.0;
  double refine_residual = 0.0;    // final misfit of the re-fitted parameters
  double design_condition = 0.0;   // conditioning of the stacked t-fit
  bool fixed_point_unique = true;  // assumption backing the generic branch
  bool degenerate_alpha = false;
  bool partial_locals = false;
  SignOfAlphaZ sign_alpha_z = SignOfAlphaZ::kUndetermined;
};

struct RecoveryResult {
  enum class Branch { kGeneric, kControlled };
  Branch branch = Branch::kGeneric;
  CartanParams params;                       // generic branch
  ControlledObservation controlled;          // controlled branch
  RecoveryDiagnostics diagnostics;

  Mat4 assembled() const;
};

struct ChannelEstimates {
  BlochAffineMap single;
  std::vector<ConditionalChannel> conditionals;
};

// QPT estimates from one randomized-settings dataset; conditions on every
// ensemble setting (the Pauli +1 eigenstates of the preset already span R^3).
ChannelEstimates estimates_from_dataset(const Dataset& dataset,
                                        const TestEnsemble& ensemble, const Povm& povm,
                                        const RecoverySettings& settings = {});

// Infinite-data estimates straight from the interaction (oracle path).
ChannelEstimates exact_channel_estimates(const TwoQubitUnitary& u,
                                         const TestEnsemble& ensemble,
                                         const Povm& povm);

// Shared pipeline: branch on unitarity, then split_svd -> alpha_from_products
// -> recover_memory_local -> assemble.
RecoveryResult estimate_from_channels(const ChannelEstimates& estimates,
                                      const RecoverySettings& settings = {});

RecoveryResult estimate_interaction(const Dataset& dataset,
                                    const TestEnsemble& ensemble, const Povm& povm,
                                    const RecoverySettings& settings = {});

// key = value report; one diagnostics entry per line
void write_report(std::ostream& os, const RecoveryResult& result,
                  std::optional<double> gauge_distance_to_truth = std::nullopt);

}  // namespace memchan

#endif  // MEMCHAN_RECOVERY_HPP
