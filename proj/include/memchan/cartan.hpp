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

#ifndef MEMCHAN_CARTAN_HPP
#define MEMCHAN_CARTAN_HPP

#include "memchan/qcore.hpp"

namespace memchan {

// Canonical two-qubit interaction parametrization
//   U = (W2 (x) V2) D(alpha) (W1 (x) V1),   W1 gauge-fixed to the identity.
// alpha lives in the chamber 0 <= |alpha_z| <= alpha_y <= alpha_x <= pi/2.
struct CartanParams {
  Mat2 w2 = Mat2::Identity();
  Mat2 v2 = Mat2::Identity();
  Vec3 alpha = Vec3::Zero();
  Mat2 v1 = Mat2::Identity();
};

// Memory-controlled pair of system unitaries,
//   U = e^{i beta} P+ (x) v_plus + e^{-i beta} P- (x) v_minus,
// P+- projecting onto the +-1 eigenvectors of axis.sigma on the memory.
struct ControlledUnitaryForm {
  Vec3 axis{1.0, 0.0, 0.0};
  double beta = 0.0;
  Mat2 v_plus = Mat2::Identity();
  Mat2 v_minus = Mat2::Identity();

  Mat4 matrix() const;
};

// D(alpha) = exp{(i/2) sum_j alpha_j sigma_j (x) sigma_j}
Mat4 d_matrix(const Vec3& alpha);

Mat4 assemble(const CartanParams& params);

bool in_canonical_chamber(const Vec3& alpha, double tol = 1e-12);

// Full factorization U = phase * (a2 (x) b2) D(alpha) (a1 (x) b1); the raw
// output of KAK before the gauge is applied.
struct KakFactors {
  Complex phase{1.0, 0.0};
  Mat2 a2, b2, a1, b1;
  Vec3 alpha;

  Mat4 reassemble() const;
};

// Moves alpha into the canonical chamber by pi-shifts, paired sign flips and
// axis permutations, compensated exactly in the local factors.
KakFactors canonicalize(const KakFactors& raw);

// The memory-side pre-factor is absorbed into the gauge, so assemble(params)
// lies in the gauge orbit of the input:
//   input = phase * (w1_found^dagger (x) I) assemble(params) (w1_found (x) I).
struct KakResult {
  CartanParams params;
  Mat2 w1_found;
  Complex phase{1.0, 0.0};
};

// Magic-basis KAK decomposition of an arbitrary two-qubit unitary.
// Throws std::invalid_argument if u is not unitary within tol.
KakResult kak_decompose(const Mat4& u, double tol = 1e-8);

// min over memory unitaries V and global phase of
//   || a - e^{i phi} (V (x) I) b (V^dagger (x) I) ||_F
// Coarse grid over SU(2) followed by local Nelder-Mead refinement.
double gauge_distance(const Mat4& a, const Mat4& b);

}  // namespace memchan

#endif  // MEMCHAN_CARTAN_HPP
