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

#include "memchan/fixedpoint.hpp"

#include <algorithm>
#include <cmath>

namespace memchan {

BlochAffineMap memory_map(const TwoQubitUnitary& u, const TestEnsemble& ensemble) {
  // Bloch action of xi -> sum_x q_x Tr_H[U (xi (x) rho_x) U^dagger]; linear in
  // xi, assembled column by column from the Pauli frame.
  auto memory_out = [&](const Vec3& r) {
    Vec3 out = Vec3::Zero();
    for (const auto& entry : ensemble.entries) {
      const Mat4 joint = apply_dilation(u, QubitState(r), entry.state);
      out += entry.weight * partial_trace(joint, Subsystem::kMemory).bloch;
    }
    return out;
  };
  BlochAffineMap m;
  m.t = memory_out(Vec3::Zero());
  for (int j = 0; j < 3; ++j) {
    Vec3 e = Vec3::Zero();
    e[j] = 1.0;
    m.T.col(j) = memory_out(e) - m.t;
  }
  return m;
}

FixedPointReport fixed_points(const BlochAffineMap& map, double eig_band) {
  FixedPointReport report;

  const Eigen::EigenSolver<Mat3> es(map.T);
  Eigen::Vector3d mags = es.eigenvalues().cwiseAbs();
  std::sort(mags.data(), mags.data() + 3, std::greater<double>());
  report.spectral_abs = mags;

  const Mat3 a = map.T - Mat3::Identity();
  Eigen::JacobiSVD<Mat3> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  // absolute cutoff: an all-zero T - I must count as nullity 3
  int nullity = 0;
  for (int i = 0; i < 3; ++i)
    if (svd.singularValues()(i) <= eig_band) ++nullity;
  report.fixed_set_dim = nullity;
  report.unique = (nullity == 0);

  // minimum-norm solution of (T - I) r = -t
  Vec3 r = Vec3::Zero();
  for (int i = 0; i < 3; ++i) {
    if (svd.singularValues()(i) <= eig_band) continue;
    r += svd.matrixV().col(i) *
         (svd.matrixU().col(i).dot(-map.t) / svd.singularValues()(i));
  }
  const double residual = (a * r + map.t).norm();
  if (residual > 1e-6 * (1.0 + map.t.norm())) {
    throw std::runtime_error(
        "fixed_points: no fixed point (inconsistent affine system; the map is "
        "not a channel)");
  }
  Vec3 rep = r;
  if (rep.norm() > 1.0) rep *= 1.0 / rep.norm();
  report.fixed_point = QubitState(rep);
  return report;
}

IterateResult iterate_to_fixed_point(const BlochAffineMap& map, const QubitState& start,
                                     double tol, int max_iters) {
  IterateResult result;
  Vec3 r = start.bloch;
  for (int it = 0; it < max_iters; ++it) {
    const Vec3 next = map.apply(r);
    const double step = (next - r).norm();
    r = next;
    result.iterations = it + 1;
    if (step <= tol) {
      result.converged = true;
      break;
    }
  }
  result.state = QubitState(r);
  return result;
}

}  // namespace memchan
