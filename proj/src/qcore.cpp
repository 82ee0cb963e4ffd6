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

#include "memchan/qcore.hpp"

#include <cmath>

namespace memchan {

namespace {
const Complex kI(0.0, 1.0);
}

const Mat2& pauli(int axis) {
  static const Mat2 sx = (Mat2() << 0, 1, 1, 0).finished();
  static const Mat2 sy = (Mat2() << 0, -kI, kI, 0).finished();
  static const Mat2 sz = (Mat2() << 1, 0, 0, -1).finished();
  switch (axis) {
    case 0: return sx;
    case 1: return sy;
    case 2: return sz;
    default: throw std::out_of_range("pauli axis must be 0, 1 or 2");
  }
}

const Mat2& identity2() {
  static const Mat2 id = Mat2::Identity();
  return id;
}

const Mat4& swap_gate() {
  static const Mat4 s = (Mat4() << 1, 0, 0, 0,
                                   0, 0, 1, 0,
                                   0, 1, 0, 0,
                                   0, 0, 0, 1).finished();
  return s;
}

Mat4 kron22(const Mat2& mem, const Mat2& sys) {
  Mat4 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      out.block<2, 2>(2 * i, 2 * j) = mem(i, j) * sys;
  return out;
}

Mat2 bloch_to_density(const Vec3& r) {
  Mat2 rho = 0.5 * Mat2::Identity();
  for (int j = 0; j < 3; ++j) rho += 0.5 * r[j] * pauli(j);
  return rho;
}

Vec3 density_to_bloch(const Mat2& rho) {
  Vec3 r;
  for (int j = 0; j < 3; ++j) r[j] = (rho * pauli(j)).trace().real();
  return r;
}

bool Povm::is_valid(double tol) const {
  if (effects.empty()) return false;
  Mat2 sum = Mat2::Zero();
  for (const Mat2& e : effects) {
    if ((e - e.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
    Eigen::SelfAdjointEigenSolver<Mat2> es(e);
    if (es.eigenvalues().minCoeff() < -tol) return false;
    if (es.eigenvalues().maxCoeff() > 1.0 + tol) return false;
    sum += e;
  }
  return (sum - Mat2::Identity()).cwiseAbs().maxCoeff() <= 1e-10;
}

Povm Povm::tetrahedral() {
  const double s = 1.0 / std::sqrt(3.0);
  const Vec3 dirs[4] = {{s, s, s}, {s, -s, -s}, {-s, s, -s}, {-s, -s, s}};
  Povm m;
  for (const Vec3& a : dirs) m.effects.push_back(0.5 * bloch_to_density(a));
  return m;
}

Vec3 TestEnsemble::average_bloch() const {
  Vec3 avg = Vec3::Zero();
  for (const Entry& e : entries) avg += e.weight * e.state.bloch;
  return avg;
}

bool TestEnsemble::is_valid(double tol) const {
  if (entries.empty()) return false;
  double wsum = 0.0;
  for (const Entry& e : entries) {
    if (e.weight <= 0.0 || e.weight > 1.0) return false;
    if (!e.state.is_physical(tol)) return false;
    wsum += e.weight;
  }
  return std::abs(wsum - 1.0) <= 1e-12;
}

bool TestEnsemble::spans_bloch_space(double tol) const {
  Eigen::MatrixXd b(3, entries.size());
  for (std::size_t x = 0; x < entries.size(); ++x) b.col(x) = entries[x].state.bloch;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b);
  return svd.rank() == 3 && svd.singularValues()(2) > tol;
}

TestEnsemble TestEnsemble::pauli_six() {
  TestEnsemble e;
  const double q = 1.0 / 6.0;
  for (int j = 0; j < 3; ++j) {
    Vec3 r = Vec3::Zero();
    r[j] = 1.0;
    e.entries.push_back({QubitState(r), q});
    e.entries.push_back({QubitState(-r), q});
  }
  return e;
}

double BlochAffineMap::choi_min_eigenvalue() const {
  // Choi matrix of the Bloch action, Choi = sum_{ij} E(|i><j|) (x) |i><j|.
  // Assemble via the Pauli transfer picture: the channel on 2x2 operators is
  // A = (I + r'.sigma)/2 with r' = T r + t for states, extended linearly.
  Mat4 choi = Mat4::Zero();
  Mat2 basis[4] = {identity2(), pauli(0), pauli(1), pauli(2)};
  // Channel action on the operator basis {I, sigma_j}: I/2-part gains t,
  // sigma-part transforms by T.
  Mat2 out_of_id = identity2();
  for (int j = 0; j < 3; ++j) out_of_id += t[j] * pauli(j);
  Mat2 out_of_sigma[3];
  for (int j = 0; j < 3; ++j) {
    out_of_sigma[j] = Mat2::Zero();
    for (int i = 0; i < 3; ++i) out_of_sigma[j] += T(i, j) * pauli(i);
  }
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      Mat2 eij = Mat2::Zero();
      eij(i, j) = 1.0;
      // expand |i><j| in the Pauli basis and push through the channel
      Mat2 mapped = Mat2::Zero();
      for (int b = 0; b < 4; ++b) {
        Complex coeff = (basis[b].adjoint() * eij).trace() / 2.0;
        mapped += coeff * (b == 0 ? out_of_id : out_of_sigma[b - 1]);
      }
      // output slot (x) input slot
      for (int a = 0; a < 2; ++a)
        for (int c = 0; c < 2; ++c)
          choi(2 * a + i, 2 * c + j) += mapped(a, c);
    }
  }
  Eigen::SelfAdjointEigenSolver<Mat4> es(0.5 * (choi + choi.adjoint()));
  return es.eigenvalues().minCoeff() / 2.0;  // normalized to trace 1
}

BlochAffineMap BlochAffineMap::from_unitary(const Mat2& v) {
  BlochAffineMap m;
  m.T = rotation_from_unitary(v);
  m.t = Vec3::Zero();
  return m;
}

Mat4 apply_dilation(const TwoQubitUnitary& u, const QubitState& xi,
                    const QubitState& rho) {
  const Mat4 joint_in = kron22(xi.density(), rho.density());
  return u.matrix * joint_in * u.matrix.adjoint();
}

Mat2 partial_trace_matrix(const Mat4& joint, Subsystem keep) {
  Mat2 out = Mat2::Zero();
  if (keep == Subsystem::kMemory) {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        out(i, j) = joint(2 * i + 0, 2 * j + 0) + joint(2 * i + 1, 2 * j + 1);
  } else {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        out(i, j) = joint(0 + i, 0 + j) + joint(2 + i, 2 + j);
  }
  return out;
}

QubitState partial_trace(const Mat4& joint, Subsystem keep) {
  return QubitState::from_density(partial_trace_matrix(joint, keep));
}

InstrumentOutcome instrument_update(const TwoQubitUnitary& u, const QubitState& xi,
                                    const QubitState& rho, const Mat2& effect) {
  const Mat4 joint = apply_dilation(u, xi, rho);
  const Mat4 weighted = joint * kron22(identity2(), effect);
  const Mat2 unnormalized = partial_trace_matrix(weighted, Subsystem::kMemory);
  const double prob = unnormalized.trace().real();
  InstrumentOutcome out;
  out.prob = prob;
  if (prob < kProbFloor) {
    throw ZeroProbabilityBranch("instrument_update: outcome probability below floor");
  }
  out.memory = QubitState::from_density(Mat2(unnormalized / prob));
  return out;
}

BlochAffineMap channel_from_dilation(const TwoQubitUnitary& u, const QubitState& xi) {
  BlochAffineMap m;
  m.t = partial_trace(apply_dilation(u, xi, QubitState::maximally_mixed()),
                      Subsystem::kSystem)
            .bloch;
  for (int j = 0; j < 3; ++j) {
    Vec3 r = Vec3::Zero();
    r[j] = 1.0;
    const Vec3 image =
        partial_trace(apply_dilation(u, xi, QubitState(r)), Subsystem::kSystem).bloch;
    m.T.col(j) = image - m.t;
  }
  return m;
}

Mat3 rotation_from_unitary(const Mat2& v) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r(i, j) = 0.5 * (pauli(i) * v * pauli(j) * v.adjoint()).trace().real();
  return r;
}

Mat2 unitary_from_rotation(const Mat3& r) {
  // Axis-angle extraction, then V = exp(-i theta/2 n.sigma).
  const double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
  const double theta = std::acos(c);
  Vec3 axis(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  if (axis.norm() > 1e-12) {
    axis.normalize();
  } else if (theta > 1.0) {
    // theta ~ pi: axis from the symmetric part, n_i^2 = (R_ii + 1)/2
    Vec3 n2 = 0.5 * (r.diagonal() + Vec3::Ones());
    axis = n2.cwiseMax(0.0).cwiseSqrt();
    // fix relative signs from off-diagonal entries
    int k = 0;
    n2.maxCoeff(&k);
    for (int j = 0; j < 3; ++j) {
      if (j == k || axis[j] < 1e-12) continue;
      if (r(k, j) + r(j, k) < 0.0) axis[j] = -axis[j];
    }
    axis.normalize();
  } else {
    axis = Vec3(0.0, 0.0, 1.0);  // identity rotation
  }
  Mat2 nsigma = Mat2::Zero();
  for (int j = 0; j < 3; ++j) nsigma += axis[j] * pauli(j);
  Mat2 v = std::cos(theta / 2.0) * identity2() -
           Complex(0.0, 1.0) * std::sin(theta / 2.0) * nsigma;
  // Fix the global phase: first entry of significant magnitude real nonnegative.
  Complex anchor = std::abs(v(0, 0)) > 1e-8 ? v(0, 0) : v(1, 0);
  v *= std::conj(anchor) / std::abs(anchor);
  return v;
}

Mat3 nearest_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  Mat3 v = svd.matrixV();
  Mat3 r = u * v.transpose();
  if (r.determinant() < 0.0) {
    u.col(2) = -u.col(2);  // flip the smallest-singular-value axis
    r = u * v.transpose();
  }
  return r;
}

}  // namespace memchan
