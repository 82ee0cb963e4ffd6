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

#include "memchan/recovery.hpp"

#include <cmath>
#include <ostream>

#include "memchan/fixedpoint.hpp"

namespace memchan {

namespace {

Mat2 su2_exp(const Vec3& v) {
  const double th = v.norm();
  if (th < 1e-300) return Mat2::Identity();
  const Vec3 n = v / th;
  Mat2 gen = Mat2::Zero();
  for (int j = 0; j < 3; ++j) gen += n[j] * pauli(j);
  return std::cos(th / 2.0) * Mat2::Identity() -
         Complex(0.0, std::sin(th / 2.0)) * gen;
}

// Model channels for a candidate parameter set: the single-use channel at the
// fixed point of the memory map and one conditional channel per test state.
// The conditioning states are taken from the estimates so model and data line
// up index by index.
Eigen::VectorXd model_residual(const CartanParams& params,
                               const ChannelEstimates& estimates,
                               const TestEnsemble& ensemble, double single_weight) {
  const TwoQubitUnitary u(assemble(params));
  const ChannelEstimates model =
      exact_channel_estimates(u, ensemble, Povm::tetrahedral());
  const std::size_t blocks = 1 + estimates.conditionals.size();
  Eigen::VectorXd res(12 * blocks);
  auto put = [&res](std::size_t at, const BlochAffineMap& a, const BlochAffineMap& b,
                    double w) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) res(at + 3 * i + j) = w * (a.T(i, j) - b.T(i, j));
      res(at + 9 + i) = w * (a.t(i) - b.t(i));
    }
  };
  put(0, model.single, estimates.single, single_weight);
  for (std::size_t x = 0; x < estimates.conditionals.size(); ++x)
    put(12 * (x + 1), model.conditionals[x].map, estimates.conditionals[x].map, 1.0);
  return res;
}

struct RefineOutcome {
  CartanParams params;
  double cost = 0.0;
};

// The closed-form pipeline amplifies tomography noise through S^-1 factors
// when some sin alpha_i is small. This stage re-fits all twelve parameters to
// the full estimated channel family (Levenberg-Marquardt, numerical Jacobian),
// which weighs every matrix entry instead of only the translation vectors.
RefineOutcome refine_generic(const CartanParams& start,
                             const ChannelEstimates& estimates) {
  TestEnsemble ensemble;
  const double uniform = 1.0 / static_cast<double>(estimates.conditionals.size());
  for (const ConditionalChannel& cond : estimates.conditionals)
    ensemble.entries.push_back({QubitState(cond.r1), uniform});

  // the single-use estimate pools roughly |ensemble| times more events than
  // each conditional estimate
  const double single_weight = std::sqrt(static_cast<double>(ensemble.size()));

  auto unpack = [&start](const Eigen::VectorXd& th) {
    CartanParams p;
    p.alpha = start.alpha + th.segment<3>(0);
    p.w2 = su2_exp(th.segment<3>(3)) * start.w2;
    p.v2 = su2_exp(th.segment<3>(6)) * start.v2;
    p.v1 = su2_exp(th.segment<3>(9)) * start.v1;
    return p;
  };

  Eigen::VectorXd th = Eigen::VectorXd::Zero(12);
  Eigen::VectorXd res = model_residual(start, estimates, ensemble, single_weight);
  double cost = res.squaredNorm();
  double lambda = 1e-3;
  const double h = 1e-6;
  for (int iter = 0; iter < 60; ++iter) {
    Eigen::MatrixXd jac(res.size(), 12);
    for (int j = 0; j < 12; ++j) {
      Eigen::VectorXd probe = th;
      probe(j) += h;
      jac.col(j) = (model_residual(unpack(probe), estimates, ensemble, single_weight) -
                    res) / h;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * res;
    bool stepped = false;
    for (int attempt = 0; attempt < 8; ++attempt) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
      const Eigen::VectorXd delta = damped.ldlt().solve(-g);
      const Eigen::VectorXd trial = th + delta;
      const Eigen::VectorXd trial_res =
          model_residual(unpack(trial), estimates, ensemble, single_weight);
      const double trial_cost = trial_res.squaredNorm();
      if (trial_cost < cost) {
        th = trial;
        res = trial_res;
        const double gain = cost - trial_cost;
        cost = trial_cost;
        lambda = std::max(lambda * 0.3, 1e-10);
        stepped = true;
        if (gain < 1e-16 * (1.0 + cost)) iter = 60;
        break;
      }
      lambda *= 10.0;
    }
    if (!stepped) break;
  }
  return {unpack(th), cost};
}

const char* sign_name(SignOfAlphaZ s) {
  switch (s) {
    case SignOfAlphaZ::kPlus: return "+1";
    case SignOfAlphaZ::kMinus: return "-1";
    default: return "undetermined";
  }
}

}  // namespace

Mat4 RecoveryResult::assembled() const {
  if (branch == Branch::kControlled) {
    // lift the observed rotation as a plain memoryless unitary
    return kron22(Mat2::Identity(), controlled.observed_unitary);
  }
  return assemble(params);
}

SplitSvd split_svd(const BlochAffineMap& e1, const RecoverySettings& settings) {
  if (e1.t.norm() > settings.t_unital_tol * settings.noise_scale) {
    throw PipelineError("split_svd", "single-use channel is not unital", e1.t.norm());
  }
  const double det = e1.T.determinant();
  if (det < -1e-6 * settings.noise_scale) {
    throw PipelineError("split_svd",
                        "negative determinant is inconsistent with the model", det);
  }

  Eigen::JacobiSVD<Mat3> svd(e1.T, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  Mat3 v = svd.matrixV();
  Vec3 c = svd.singularValues();  // descending

  // deterministic sign convention: largest-magnitude entry of each left
  // singular vector positive, flips applied to (u_i, v_i) pairs
  for (int i = 0; i < 3; ++i) {
    int k = 0;
    u.col(i).cwiseAbs().maxCoeff(&k);
    if (u(k, i) < 0.0) {
      u.col(i) = -u.col(i);
      v.col(i) = -v.col(i);
    }
  }
  // make both factors proper rotations; determinants agree whenever
  // det T >= 0, so a paired flip of the smallest singular direction suffices
  if (u.determinant() < 0.0 && v.determinant() < 0.0) {
    u.col(2) = -u.col(2);
    v.col(2) = -v.col(2);
  } else if (u.determinant() * v.determinant() < 0.0) {
    // only possible when the smallest singular value vanishes
    if (c(2) > 1e-6 * settings.noise_scale) {
      throw PipelineError("split_svd", "improper rotation pair at nonzero det",
                          c(2));
    }
    if (u.determinant() < 0.0) u.col(2) = -u.col(2);
    else v.col(2) = -v.col(2);
  }
  return {u, c, v.transpose()};
}

AlphaEstimate alpha_from_products(const Vec3& cdiag, const RecoverySettings& settings) {
  const double px = std::max(cdiag[0], 0.0);
  const double py = std::max(cdiag[1], 0.0);
  const double pz = std::max(cdiag[2], 0.0);
  AlphaEstimate est;
  est.degenerate = (px <= settings.degenerate_tol || py <= settings.degenerate_tol ||
                    pz <= settings.degenerate_tol);
  // mildly inconsistent products (p_y p_z > p_x and cyclic) arise from
  // sampling noise; the clamp below absorbs them
  auto cosine = [&](double a, double b, double d) {
    if (d <= settings.degenerate_tol) return 0.0;  // ill-conditioned, flagged above
    return std::clamp(std::sqrt(std::max(a * b, 0.0) / d), 0.0, 1.0);
  };
  const double c1 = cosine(py, pz, px);
  const double c2 = cosine(px, pz, py);
  const double c3 = cosine(px, py, pz);
  est.alpha_abs = Vec3(std::acos(c1), std::acos(c2), std::acos(c3));
  return est;
}

MemoryLocal recover_memory_local(const std::vector<ConditionalChannel>& cond_maps,
                                 const Mat3& r1, const Mat3& r2,
                                 const Vec3& alpha_abs,
                                 const RecoverySettings& settings) {
  if (cond_maps.size() < 3) {
    throw PipelineError("recover_memory_local",
                        "need at least 3 conditioning states");
  }
  const double s1 = std::sin(alpha_abs[0]);
  const double s2 = std::sin(alpha_abs[1]);
  const double s3 = std::sin(alpha_abs[2]);
  const double c1 = std::cos(alpha_abs[0]);
  const Vec3 s_diag(s2 * s3, s3 * s1, s1 * s2);

  MemoryLocal result;
  result.partial = (s1 < settings.s_min || s2 < settings.s_min || s3 < settings.s_min);

  // stacked fit of A in t_i = A r1_i
  Eigen::MatrixXd rm(3, cond_maps.size());
  Eigen::MatrixXd tm(3, cond_maps.size());
  for (std::size_t i = 0; i < cond_maps.size(); ++i) {
    rm.col(i) = cond_maps[i].r1;
    tm.col(i) = cond_maps[i].map.t;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(rm, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.rank() < 3) {
    throw PipelineError("recover_memory_local",
                        "conditioning states do not span Bloch space");
  }
  const Mat3 a = tm * svd.solve(Mat3::Identity().eval());
  result.fit_residual = (a * rm - tm).norm();

  // O2 = S^-1 R2^T A R1^T S^-1 with |alpha| sines; directions with s_i ~ 0
  // carry no information and are fixed by the rotation projection
  Vec3 s_inv;
  for (int i = 0; i < 3; ++i)
    s_inv[i] = s_diag[i] > settings.s_min * settings.s_min
                   ? 1.0 / s_diag[i]
                   : 0.0;
  const Mat3 o2_raw = s_inv.asDiagonal() * (r2.transpose() * a * r1.transpose()) *
                      s_inv.asDiagonal();
  result.o2 = nearest_rotation(o2_raw);

  // sign of alpha_z from F_21 = -m_z c_1 s_3 of the conditional channel
  if (alpha_abs[2] <= settings.degenerate_tol || s3 <= settings.degenerate_tol ||
      c1 <= settings.degenerate_tol) {
    result.sign_alpha_z = SignOfAlphaZ::kUndetermined;
    return result;
  }
  double accum = 0.0;
  for (const ConditionalChannel& cond : cond_maps) {
    const Vec3 m = result.o2 * (s_diag.asDiagonal() * (r1 * cond.r1));
    if (std::abs(m[2]) < settings.m_min) continue;
    const Mat3 f = r2.transpose() * cond.map.T * r1.transpose();
    accum += -f(1, 0) / (m[2] * c1) * std::abs(m[2]);
  }
  if (accum > 0.0) {
    result.sign_alpha_z = SignOfAlphaZ::kPlus;
  } else if (accum < 0.0) {
    result.sign_alpha_z = SignOfAlphaZ::kMinus;
    // the fit used |s_3|; a negative alpha_z conjugates O2 by a pi rotation
    // about z
    const Vec3 dz(-1.0, -1.0, 1.0);
    result.o2 = dz.asDiagonal() * result.o2 * dz.asDiagonal();
  } else {
    result.sign_alpha_z = SignOfAlphaZ::kUndetermined;
  }
  return result;
}

// Sampling noise alone depresses the score of an exactly unitary channel:
// with per-entry error sigma on T the orthogonality defect grows like
// sigma*sqrt(24). The decision threshold therefore relaxes with noise_scale,
// capped so mildly entangling generic interactions are never misrouted.
double effective_unitary_threshold(const RecoverySettings& settings) {
  const double relax = std::min(settings.noise_scale, 3.0);
  return 1.0 - (1.0 - settings.unitary_threshold) * relax;
}

ControlledObservation classify_and_extract_controlled(
    const BlochAffineMap& e1, const RecoverySettings& settings) {
  const double score = unitarity_score(e1);
  if (score < effective_unitary_threshold(settings)) {
    throw PipelineError("classify_controlled",
                        "unitarity score below threshold; use the generic branch",
                        score);
  }
  ControlledObservation obs;
  obs.score = score;
  obs.observed_unitary = unitary_from_rotation(nearest_rotation(e1.T));
  return obs;
}

ChannelEstimates estimates_from_dataset(const Dataset& dataset,
                                        const TestEnsemble& ensemble, const Povm& povm,
                                        const RecoverySettings& settings) {
  ChannelEstimates est;
  est.single = reconstruct_single(tally(dataset, ensemble.size(), povm.size()),
                                  ensemble, povm);
  for (std::size_t x = 0; x < ensemble.size(); ++x) {
    ConditionalChannel cond;
    cond.r1 = ensemble.entries[x].state.bloch;
    cond.map = reconstruct_conditional(dataset, ensemble, povm, static_cast<int>(x),
                                       settings.min_pairs);
    est.conditionals.push_back(cond);
  }
  return est;
}

ChannelEstimates exact_channel_estimates(const TwoQubitUnitary& u,
                                         const TestEnsemble& ensemble,
                                         const Povm& povm) {
  const ExactStatistics stats =
      exact_statistics(u, QubitState::maximally_mixed(), ensemble, povm);
  ChannelEstimates est;
  est.single = channel_from_dilation(u, stats.xi_bar);
  for (const auto& entry : ensemble.entries) {
    // memory after one (unconditioned) collision with the conditioning state
    const QubitState xi_next =
        partial_trace(apply_dilation(u, stats.xi_bar, entry.state), Subsystem::kMemory);
    ConditionalChannel cond;
    cond.r1 = entry.state.bloch;
    cond.map = channel_from_dilation(u, xi_next);
    est.conditionals.push_back(cond);
  }
  return est;
}

RecoveryResult estimate_from_channels(const ChannelEstimates& estimates,
                                      const RecoverySettings& settings) {
  RecoveryResult result;
  result.diagnostics.unitarity = unitarity_score(estimates.single);

  if (result.diagnostics.unitarity >= effective_unitary_threshold(settings)) {
    result.branch = RecoveryResult::Branch::kControlled;
    result.controlled = classify_and_extract_controlled(estimates.single, settings);
    result.diagnostics.fixed_point_unique = false;
    return result;
  }

  const SplitSvd split = split_svd(estimates.single, settings);
  result.diagnostics.svd_residual =
      (split.r2 * split.cdiag.asDiagonal() * split.r1 - estimates.single.T).norm();

  const AlphaEstimate alpha = alpha_from_products(split.cdiag, settings);
  result.diagnostics.degenerate_alpha = alpha.degenerate;

  const MemoryLocal local = recover_memory_local(estimates.conditionals, split.r1,
                                                 split.r2, alpha.alpha_abs, settings);
  result.diagnostics.partial_locals = local.partial;
  result.diagnostics.conditional_residual = local.fit_residual;
  result.diagnostics.sign_alpha_z = local.sign_alpha_z;

  result.branch = RecoveryResult::Branch::kGeneric;
  result.params.alpha = alpha.alpha_abs;
  if (local.sign_alpha_z == SignOfAlphaZ::kMinus)
    result.params.alpha[2] = -result.params.alpha[2];
  result.params.w2 = unitary_from_rotation(local.o2);
  result.params.v2 = unitary_from_rotation(split.r2);
  result.params.v1 = unitary_from_rotation(split.r1);
  if (settings.refine) {
    RefineOutcome best = refine_generic(result.params, estimates);
    if (std::abs(result.params.alpha[2]) > settings.degenerate_tol) {
      // the F21 sign read-out is noise-sensitive; let the fit arbitrate
      // between the two sign branches
      CartanParams flipped = result.params;
      flipped.alpha[2] = -flipped.alpha[2];
      const Vec3 dz(-1.0, -1.0, 1.0);
      flipped.w2 = unitary_from_rotation(
          dz.asDiagonal() * rotation_from_unitary(result.params.w2) *
          dz.asDiagonal());
      const RefineOutcome alt = refine_generic(flipped, estimates);
      if (alt.cost < best.cost) best = alt;
    }
    result.params = best.params;
    // the fit explores the parameter space freely; fold a Weyl-equivalent
    // minimum back into the canonical chamber (a memory-gauge move)
    const Vec3& a = result.params.alpha;
    if (!(std::abs(a[2]) <= a[1] && a[1] <= a[0] && a[0] <= M_PI / 2.0)) {
      result.params = kak_decompose(assemble(result.params)).params;
    }
    result.diagnostics.refine_residual = std::sqrt(best.cost);
  }
  return result;
}

RecoveryResult estimate_interaction(const Dataset& dataset,
                                    const TestEnsemble& ensemble, const Povm& povm,
                                    const RecoverySettings& settings) {
  return estimate_from_channels(estimates_from_dataset(dataset, ensemble, povm, settings),
                                settings);
}

void write_report(std::ostream& os, const RecoveryResult& result,
                  std::optional<double> gauge_distance_to_truth) {
  os << "branch = "
     << (result.branch == RecoveryResult::Branch::kGeneric ? "generic" : "controlled")
     << "\n";
  os << "unitarity_score = " << result.diagnostics.unitarity << "\n";
  if (result.branch == RecoveryResult::Branch::kGeneric) {
    os << "alpha = " << result.params.alpha(0) << "," << result.params.alpha(1) << ","
       << result.params.alpha(2) << "\n";
    auto print_unitary = [&os](const char* name, const Mat2& m) {
      os << name << " = ";
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          os << m(i, j).real() << (m(i, j).imag() >= 0 ? "+" : "") << m(i, j).imag()
             << "i" << ((i == 1 && j == 1) ? "\n" : ",");
    };
    print_unitary("w2", result.params.w2);
    print_unitary("v2", result.params.v2);
    print_unitary("v1", result.params.v1);
    os << "sign_alpha_z = " << sign_name(result.diagnostics.sign_alpha_z) << "\n";
    os << "svd_residual = " << result.diagnostics.svd_residual << "\n";
    os << "conditional_residual = " << result.diagnostics.conditional_residual << "\n";
    os << "refine_residual = " << result.diagnostics.refine_residual << "\n";
    os << "degenerate_alpha = " << (result.diagnostics.degenerate_alpha ? 1 : 0)
       << "\n";
    os << "partial_locals = " << (result.diagnostics.partial_locals ? 1 : 0) << "\n";
  } else {
    const Mat2& v = result.controlled.observed_unitary;
    os << "observed_unitary = ";
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        os << v(i, j).real() << (v(i, j).imag() >= 0 ? "+" : "") << v(i, j).imag()
           << "i" << ((i == 1 && j == 1) ? "\n" : ",");
  }
  if (gauge_distance_to_truth) {
    os << "gauge_distance = " << *gauge_distance_to_truth << "\n";
  }
}

}  // namespace memchan
