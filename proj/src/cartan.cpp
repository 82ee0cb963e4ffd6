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

#include "memchan/cartan.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>

namespace memchan {

namespace {

const Complex kI(0.0, 1.0);
constexpr double kPi = std::numbers::pi;

// Magic basis columns: |Phi+>, i|Phi->, i|Psi+>, |Psi->.
const Mat4& magic_basis() {
  static const Mat4 m = [] {
    const double s = 1.0 / std::sqrt(2.0);
    Mat4 out;
    out << s, s * kI, 0, 0,
           0, 0, s * kI, s,
           0, 0, s * kI, -s,
           s, -s * kI, 0, 0;
    return out;
  }();
  return m;
}

// Eigenvalue signatures of sigma_j (x) sigma_j on the magic columns.
constexpr double kMagicSignature[4][3] = {
    {+1, -1, +1}, {-1, +1, +1}, {+1, +1, -1}, {-1, -1, -1}};

double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

// Splits a 4x4 operator into a (x) b with ||a (x) b - q|| minimized exactly
// when q is a tensor product. Both factors are kept unitary for unitary input.
struct KronFactors {
  Mat2 mem, sys;
  double residual;
};

KronFactors factor_kron22(const Mat4& q) {
  // find the 2x2 block with largest norm; it is proportional to the system factor
  int bi = 0, bj = 0;
  double best = -1.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double n = q.block<2, 2>(2 * i, 2 * j).norm();
      if (n > best) {
        best = n;
        bi = i;
        bj = j;
      }
    }
  }
  Mat2 sys = q.block<2, 2>(2 * bi, 2 * bj);
  sys *= std::sqrt(2.0) / sys.norm();  // unitary factors have Frobenius norm sqrt(2)
  Mat2 mem;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      mem(i, j) = (sys.adjoint() * q.block<2, 2>(2 * i, 2 * j)).trace() / 2.0;
  const Mat4 rebuilt = kron22(mem, sys);
  return {mem, sys, (rebuilt - q).norm()};
}

// Simultaneously diagonalizes the commuting real symmetric parts of the
// complex symmetric unitary s with a real orthogonal matrix.
Eigen::Matrix4d orthogonal_eigenbasis(const Mat4& s) {
  const Eigen::Matrix4d re = s.real();
  const Eigen::Matrix4d im = s.imag();
  // deterministic sequence of mixing weights; retry until both parts are
  // diagonalized (fails only when the mix has a degenerate spectrum)
  const double weights[] = {0.71936053, 0.13398241, 1.27596047, 2.05913521,
                            0.33333333, 3.14159265, 0.05234113, 0.91283711};
  for (double w : weights) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(re + w * im);
    const Eigen::Matrix4d p = es.eigenvectors();
    const Eigen::Matrix4d dre = p.transpose() * re * p;
    const Eigen::Matrix4d dim = p.transpose() * im * p;
    double off = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (i != j) off = std::max(off, std::max(std::abs(dre(i, j)), std::abs(dim(i, j))));
    if (off < 1e-9) return p;
  }
  throw std::runtime_error("kak_decompose: simultaneous diagonalization failed");
}

}  // namespace

Mat4 ControlledUnitaryForm::matrix() const {
  Mat2 nsigma = Mat2::Zero();
  for (int j = 0; j < 3; ++j) nsigma += axis[j] * pauli(j);
  const Mat2 p_plus = 0.5 * (Mat2::Identity() + nsigma);
  const Mat2 p_minus = 0.5 * (Mat2::Identity() - nsigma);
  return std::exp(kI * beta) * kron22(p_plus, v_plus) +
         std::exp(-kI * beta) * kron22(p_minus, v_minus);
}

Mat4 d_matrix(const Vec3& alpha) {
  Mat4 d = Mat4::Identity();
  for (int j = 0; j < 3; ++j) {
    const Mat4 gen = kron22(pauli(j), pauli(j));
    const Mat4 factor = std::cos(alpha[j] / 2.0) * Mat4::Identity() +
                        kI * std::sin(alpha[j] / 2.0) * gen;
    d = factor * d;
  }
  return d;
}

Mat4 assemble(const CartanParams& params) {
  return kron22(params.w2, params.v2) * d_matrix(params.alpha) *
         kron22(Mat2::Identity(), params.v1);
}

bool in_canonical_chamber(const Vec3& alpha, double tol) {
  return std::abs(alpha[2]) <= alpha[1] + tol && alpha[1] <= alpha[0] + tol &&
         alpha[0] <= kPi / 2.0 + tol && alpha[1] >= -tol;
}

Mat4 KakFactors::reassemble() const {
  return phase * kron22(a2, b2) * d_matrix(alpha) * kron22(a1, b1);
}

KakFactors canonicalize(const KakFactors& raw) {
  KakFactors f = raw;

  // reduce each component mod pi into (-pi/2, pi/2];
  // D(a + n pi e_j) = (i sigma_j (x) sigma_j)^n D(a)
  for (int j = 0; j < 3; ++j) {
    long n = std::lround(f.alpha[j] / kPi);
    if (f.alpha[j] - n * kPi <= -kPi / 2.0 + 1e-14) n -= 1;
    if (n == 0) continue;
    f.alpha[j] -= n * kPi;
    const long m = ((n % 4) + 4) % 4;
    for (long k = 0; k < m; ++k) f.phase *= kI;
    if (m % 2 == 1) {
      f.a2 = f.a2 * pauli(j);
      f.b2 = f.b2 * pauli(j);
    }
  }

  // sort |alpha| descending by axis swaps;
  // (c (x) c) D(a) (c (x) c)^dagger = D(swap_ab a), c = exp(-i pi/4 sigma_k)
  auto swap_axes = [&f](int a, int b) {
    const int k = 3 - a - b;
    const Mat2 c = std::cos(kPi / 4.0) * Mat2::Identity() -
                   kI * std::sin(kPi / 4.0) * pauli(k);
    std::swap(f.alpha[a], f.alpha[b]);
    f.a2 = f.a2 * c.adjoint();
    f.b2 = f.b2 * c.adjoint();
    f.a1 = c * f.a1;
    f.b1 = c * f.b1;
  };
  for (int pass = 0; pass < 2; ++pass)
    for (int j = 0; j < 2; ++j)
      if (std::abs(f.alpha[j]) < std::abs(f.alpha[j + 1])) swap_axes(j, j + 1);

  // flip signs in pairs until at most alpha_z is negative;
  // D(a with a_j, a_k negated) = (sigma_l (x) I) D(a) (sigma_l (x) I), l != j,k
  auto flip_pair = [&f](int j, int k) {
    const int l = 3 - j - k;
    f.alpha[j] = -f.alpha[j];
    f.alpha[k] = -f.alpha[k];
    f.a2 = f.a2 * pauli(l);
    f.a1 = pauli(l) * f.a1;
  };
  const bool nx = f.alpha[0] < 0.0, ny = f.alpha[1] < 0.0, nz = f.alpha[2] < 0.0;
  if (nx && ny) flip_pair(0, 1);
  else if (nx) flip_pair(0, 2);
  else if (ny) flip_pair(1, 2);
  (void)nz;  // a lone negative alpha_z is canonical

  return f;
}

KakResult kak_decompose(const Mat4& u, double tol) {
  if ((u * u.adjoint() - Mat4::Identity()).cwiseAbs().maxCoeff() > tol) {
    throw std::invalid_argument("kak_decompose: input is not unitary");
  }
  const Mat4& m = magic_basis();

  // remove the determinant phase
  const Complex det = u.determinant();
  const double phase0 = std::arg(det) / 4.0;
  const Mat4 up = u * std::exp(-kI * phase0);

  const Mat4 v = m.adjoint() * up * m;
  const Mat4 s = v.transpose() * v;

  Eigen::Matrix4d p = orthogonal_eigenbasis(s);
  if (p.determinant() < 0.0) p.col(3) = -p.col(3);

  const Mat4 pc = p.cast<Complex>();
  const Mat4 s_diag = pc.transpose() * s * pc;
  std::array<double, 4> lambda{};
  for (int k = 0; k < 4; ++k) lambda[k] = std::arg(s_diag(k, k)) / 2.0;

  auto build_k1 = [&](const std::array<double, 4>& lam) {
    Mat4 e_inv = Mat4::Zero();
    for (int k = 0; k < 4; ++k) e_inv(k, k) = std::exp(-kI * lam[k]);
    return Mat4(v * pc * e_inv);
  };
  Mat4 k1 = build_k1(lambda);
  if (k1.real().determinant() < 0.0) {
    lambda[0] += kPi;  // flips the sign of k1's first column, product preserved
    k1 = build_k1(lambda);
  }
  if (k1.imag().cwiseAbs().maxCoeff() > 1e-7) {
    throw std::runtime_error("kak_decompose: left orthogonal factor is not real");
  }

  // interaction phases: lambda_k = theta + (signature_k . alpha) / 2
  Eigen::Matrix4d coeffs;
  Eigen::Vector4d rhs;
  for (int k = 0; k < 4; ++k) {
    coeffs(k, 0) = 1.0;
    for (int j = 0; j < 3; ++j) coeffs(k, j + 1) = 0.5 * kMagicSignature[k][j];
    rhs(k) = lambda[k];
  }
  const Eigen::Vector4d sol = coeffs.fullPivLu().solve(rhs);
  const double theta = sol(0);
  const Vec3 alpha_raw(sol(1), sol(2), sol(3));

  const Mat4 q2 = m * k1 * m.adjoint();
  const Mat4 q1 = m * pc.transpose() * m.adjoint();
  const KronFactors left = factor_kron22(q2);
  const KronFactors right = factor_kron22(q1);
  if (left.residual > 1e-7 || right.residual > 1e-7) {
    throw std::runtime_error("kak_decompose: local factor extraction failed");
  }

  KakFactors raw;
  raw.phase = std::exp(kI * (phase0 + theta));
  raw.a2 = left.mem;
  raw.b2 = left.sys;
  raw.a1 = right.mem;
  raw.b1 = right.sys;
  raw.alpha = alpha_raw;
  const KakFactors canon = canonicalize(raw);

  KakResult result;
  // Absorb the memory-side pre-factor into the gauge: conjugating by
  // (a1 (x) I) moves it into w2, so assemble(params) lies in the gauge
  // orbit of the input.
  result.params.w2 = canon.a1 * canon.a2;
  result.params.v2 = canon.b2;
  result.params.alpha = canon.alpha;
  result.params.v1 = canon.b1;
  result.w1_found = canon.a1;
  result.phase = canon.phase;
  return result;
}

namespace {

Mat2 su2_from_vector(const Vec3& v) {
  const double angle = v.norm();
  if (angle < 1e-300) return Mat2::Identity();
  const Vec3 n = v / angle;
  Mat2 nsigma = Mat2::Zero();
  for (int j = 0; j < 3; ++j) nsigma += n[j] * pauli(j);
  return std::cos(angle / 2.0) * Mat2::Identity() -
         kI * std::sin(angle / 2.0) * nsigma;
}

double conjugation_residual(const Mat4& a, const Mat4& b, const Vec3& v) {
  const Mat2 vm = su2_from_vector(v);
  const Mat4 conj = kron22(vm, Mat2::Identity()) * b *
                    kron22(vm.adjoint(), Mat2::Identity());
  const Complex overlap = (conj.adjoint() * a).trace();
  const Complex phase = std::abs(overlap) > 1e-300
                            ? overlap / std::abs(overlap)
                            : Complex(1.0, 0.0);
  return (a - phase * conj).norm();
}

// minimal Nelder-Mead in R^3
Vec3 nelder_mead(const std::function<double(const Vec3&)>& f, const Vec3& start,
                 double scale, int max_iter) {
  std::array<Vec3, 4> pts;
  std::array<double, 4> vals;
  pts[0] = start;
  for (int i = 0; i < 3; ++i) {
    pts[i + 1] = start;
    pts[i + 1][i] += scale;
  }
  for (int i = 0; i < 4; ++i) vals[i] = f(pts[i]);

  for (int it = 0; it < max_iter; ++it) {
    std::array<int, 4> idx{0, 1, 2, 3};
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return vals[a] < vals[b]; });
    std::array<Vec3, 4> sp;
    std::array<double, 4> sv;
    for (int i = 0; i < 4; ++i) {
      sp[i] = pts[idx[i]];
      sv[i] = vals[idx[i]];
    }
    pts = sp;
    vals = sv;
    if ((pts[3] - pts[0]).norm() < 1e-12 && vals[3] - vals[0] < 1e-14) break;

    const Vec3 centroid = (pts[0] + pts[1] + pts[2]) / 3.0;
    const Vec3 refl = centroid + (centroid - pts[3]);
    const double fr = f(refl);
    if (fr < vals[0]) {
      const Vec3 exp_pt = centroid + 2.0 * (centroid - pts[3]);
      const double fe = f(exp_pt);
      if (fe < fr) {
        pts[3] = exp_pt;
        vals[3] = fe;
      } else {
        pts[3] = refl;
        vals[3] = fr;
      }
    } else if (fr < vals[2]) {
      pts[3] = refl;
      vals[3] = fr;
    } else {
      const Vec3 contr = centroid + 0.5 * (pts[3] - centroid);
      const double fc = f(contr);
      if (fc < vals[3]) {
        pts[3] = contr;
        vals[3] = fc;
      } else {
        for (int i = 1; i < 4; ++i) {
          pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
          vals[i] = f(pts[i]);
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i < 4; ++i)
    if (vals[i] < vals[best]) best = i;
  return pts[best];
}

}  // namespace

double gauge_distance(const Mat4& a, const Mat4& b) {
  auto objective = [&](const Vec3& v) { return conjugation_residual(a, b, v); };

  // coarse grid: Fibonacci sphere directions x rotation angles, plus identity
  struct Candidate {
    double value;
    Vec3 v;
  };
  std::vector<Candidate> grid;
  grid.push_back({objective(Vec3::Zero()), Vec3::Zero()});
  const int n_dirs = 64;
  const int n_angles = 9;
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int d = 0; d < n_dirs; ++d) {
    const double z = 1.0 - 2.0 * (d + 0.5) / n_dirs;
    const double rxy = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * d;
    const Vec3 dir(rxy * std::cos(phi), rxy * std::sin(phi), z);
    for (int t = 1; t <= n_angles; ++t) {
      const double angle = kPi * t / n_angles;
      const Vec3 v = angle * dir;
      grid.push_back({objective(v), v});
    }
  }
  std::sort(grid.begin(), grid.end(),
            [](const Candidate& x, const Candidate& y) { return x.value < y.value; });

  double best = grid.front().value;
  for (int s = 0; s < 4 && s < static_cast<int>(grid.size()); ++s) {
    const Vec3 refined = nelder_mead(objective, grid[s].v, 0.2, 600);
    // second pass with a small simplex to polish
    const Vec3 polished = nelder_mead(objective, refined, 1e-4, 400);
    best = std::min({best, objective(refined), objective(polished)});
  }
  return best;
}

}  // namespace memchan
