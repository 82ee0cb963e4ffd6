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

#ifndef MEMCHAN_FIXEDPOINT_HPP
#define MEMCHAN_FIXEDPOINT_HPP

#include "memchan/qcore.hpp"

namespace memchan {

struct FixedPointReport {
  QubitState fixed_point;     // representative (minimum-norm solution)
  bool unique = true;
  int fixed_set_dim = 0;      // dimension of the affine fixed set in Bloch space
  Vec3 spectral_abs;          // |eigenvalues| of the Bloch matrix, descending
};

// Channel induced on the memory by one collision with the average test state:
// xi -> Tr_H[U (xi (x) rho_bar) U^dagger].
BlochAffineMap memory_map(const TwoQubitUnitary& u, const TestEnsemble& ensemble);

// Solves (T - I) r = -t. Eigenvalue-1 detection within band eig_band.
// Throws std::runtime_error when the system is inconsistent (possible only for
// unphysical affine maps).
FixedPointReport fixed_points(const BlochAffineMap& map, double eig_band = 1e-7);

struct IterateResult {
  QubitState state;
  bool converged = false;
  int iterations = 0;
};

IterateResult iterate_to_fixed_point(const BlochAffineMap& map, const QubitState& start,
                                     double tol = 1e-12, int max_iters = 100000);

}  // namespace memchan

#endif  // MEMCHAN_FIXEDPOINT_HPP
