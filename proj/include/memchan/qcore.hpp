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

#ifndef MEMCHAN_QCORE_HPP
#define MEMCHAN_QCORE_HPP

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace memchan {

using Complex = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4cd;
using Vec3 = Eigen::Vector3d;

// Global numeric tolerance for validity checks.
inline constexpr double kTol = 1e-9;

// Probabilities below this are treated as numerically impossible branches.
inline constexpr double kProbFloor = 1e-14;

struct ZeroProbabilityBranch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const Mat2& pauli(int axis);  // axis 0,1,2 -> sigma_x, sigma_y, sigma_z
const Mat2& identity2();
const Mat4& swap_gate();

// Kronecker product, memory (left factor) tensor system (right factor).
// Row/column index = 2*m + s throughout the codebase.
Mat4 kron22(const Mat2& mem, const Mat2& sys);

Mat2 bloch_to_density(const Vec3& r);
Vec3 density_to_bloch(const Mat2& rho);

// Density operator of one qubit, carried as a Bloch 3-vector.
struct QubitState {
  Vec3 bloch{0.0, 0.0, 0.0};

  QubitState() = default;
  explicit QubitState(const Vec3& r) : bloch(r) {}
  QubitState(double x, double y, double z) : bloch(x, y, z) {}

  static QubitState from_density(const Mat2& rho) {
    return QubitState(density_to_bloch(rho));
  }
  static QubitState maximally_mixed() { return QubitState(0.0, 0.0, 0.0); }

  Mat2 density() const { return bloch_to_density(bloch); }
  bool is_physical(double tol = kTol) const { return bloch.norm() <= 1.0 + tol; }
};

// 4x4 unitary acting on memory (x) system.
struct TwoQubitUnitary {
  Mat4 matrix = Mat4::Identity();

  TwoQubitUnitary() = default;
  explicit TwoQubitUnitary(const Mat4& u) : matrix(u) {}

  bool is_unitary(double tol = 1e-10) const {
    return (matrix * matrix.adjoint() - Mat4::Identity()).cwiseAbs().maxCoeff() <= tol;
  }
};

struct Povm {
  std::vector<Mat2> effects;

  std::size_t size() const { return effects.size(); }
  // Checks 0 <= E_k <= I per effect and sum to identity.
  bool is_valid(double tol = kTol) const;

  // Symmetric 4-outcome informationally complete POVM,
  // E_k = (I + a_k.sigma)/4 with a_k the tetrahedron directions.
  static Povm tetrahedral();
};

struct TestEnsemble {
  struct Entry {
    QubitState state;
    double weight = 0.0;
  };
  std::vector<Entry> entries;

  std::size_t size() const { return entries.size(); }
  Vec3 average_bloch() const;
  QubitState average_state() const { return QubitState(average_bloch()); }
  bool is_valid(double tol = kTol) const;
  // True when the Bloch vectors span R^3.
  bool spans_bloch_space(double tol = 1e-6) const;

  // Six Pauli eigenstates, uniform weights. Average state is I/2.
  static TestEnsemble pauli_six();
};

// Qubit channel as an affine Bloch action r -> T r + t. Complete positivity
// is not enforced; raw linear-inversion estimates may be unphysical.
struct BlochAffineMap {
  Mat3 T = Mat3::Identity();
  Vec3 t = Vec3::Zero();

  Vec3 apply(const Vec3& r) const { return T * r + t; }
  QubitState apply(const QubitState& s) const { return QubitState(apply(s.bloch)); }

  // Minimum eigenvalue of the Choi matrix; >= -tol for CP maps.
  double choi_min_eigenvalue() const;

  static BlochAffineMap identity() { return {}; }
  static BlochAffineMap from_unitary(const Mat2& v);
};

// Pre-trace joint output U (xi (x) rho) U^dagger.
Mat4 apply_dilation(const TwoQubitUnitary& u, const QubitState& xi,
                    const QubitState& rho);

enum class Subsystem { kMemory, kSystem };

QubitState partial_trace(const Mat4& joint, Subsystem keep);
Mat2 partial_trace_matrix(const Mat4& joint, Subsystem keep);

struct InstrumentOutcome {
  double prob = 0.0;
  QubitState memory;  // post-measurement memory state (undefined if prob ~ 0)
};

// One collision followed by a system measurement with effect E: returns the
// outcome probability and the conditional memory state.
// Throws ZeroProbabilityBranch when prob < kProbFloor.
InstrumentOutcome instrument_update(const TwoQubitUnitary& u, const QubitState& xi,
                                    const QubitState& rho, const Mat2& effect);

// The single-use channel rho -> Tr_M[U (xi (x) rho) U^dagger] in Bloch form.
BlochAffineMap channel_from_dilation(const TwoQubitUnitary& u, const QubitState& xi);

// SO(3) rotation of the Bloch sphere induced by conjugation with a 2x2 unitary:
// R_ij = Re Tr(sigma_i V sigma_j V^dagger) / 2.
Mat3 rotation_from_unitary(const Mat2& v);

// SU(2) lift of a proper rotation; phase fixed so the first entry of
// significant magnitude is real nonnegative.
Mat2 unitary_from_rotation(const Mat3& r);

// Orthogonal polar factor with determinant correction (nearest proper rotation).
Mat3 nearest_rotation(const Mat3& m);

}  // namespace memchan

#endif  // MEMCHAN_QCORE_HPP
