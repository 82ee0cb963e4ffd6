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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "memchan/simulator.hpp"
#include "test_util.hpp"

using namespace memchan;

namespace {

ExperimentConfig base_config(const Mat4& u) {
  ExperimentConfig cfg;
  cfg.interaction = TwoQubitUnitary(u);
  cfg.n_steps = 1000;
  cfg.seed = 7;
  return cfg;
}

}  // namespace

TEST_CASE("counter rng is deterministic and stream-separated") {
  CounterRng a(42, 0), b(42, 0), c(42, 1), d(43, 0);
  bool stream_differs = false, seed_differs = false;
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t va = a.next_u64();
    CHECK(va == b.next_u64());
    if (va != c.next_u64()) stream_differs = true;
    if (va != d.next_u64()) seed_differs = true;
  }
  CHECK(stream_differs);
  CHECK(seed_differs);
}

TEST_CASE("counter rng uniforms live in the unit interval and look uniform") {
  CounterRng r(5, 2);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("config validation rejects bad inputs") {
  ExperimentConfig cfg = base_config(Mat4::Identity());
  CHECK_NOTHROW(cfg.validate());

  ExperimentConfig bad = cfg;
  bad.interaction.matrix(0, 0) = 2.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = cfg;
  bad.initial_memory = QubitState(1.5, 0.0, 0.0);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = cfg;
  bad.n_steps = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = cfg;
  bad.mode = RunMode::kOrdered;
  bad.block_size = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = cfg;
  bad.povm.effects.pop_back();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("config fingerprint separates configs and is stable") {
  const ExperimentConfig cfg = base_config(Mat4::Identity());
  const std::uint64_t fp = config_fingerprint(cfg);
  CHECK(fp == config_fingerprint(cfg));

  ExperimentConfig other = cfg;
  other.seed = 8;
  CHECK(fp != config_fingerprint(other));

  other = cfg;
  other.interaction = TwoQubitUnitary(swap_gate());
  CHECK(fp != config_fingerprint(other));
}

TEST_CASE("runs are reproducible and ids stay in range") {
  std::mt19937_64 rng(611);
  const ExperimentConfig cfg = base_config(test::random_two_qubit_unitary(rng));
  const Dataset a = run_experiment(cfg);
  const Dataset b = run_experiment(cfg);
  REQUIRE(a.records.size() == 1000);
  REQUIRE(b.records.size() == 1000);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].step == static_cast<std::int64_t>(i));
    CHECK(a.records[i].setting_id == b.records[i].setting_id);
    CHECK(a.records[i].outcome_id == b.records[i].outcome_id);
    CHECK(a.records[i].setting_id >= 0);
    CHECK(a.records[i].setting_id < 6);
    CHECK(a.records[i].outcome_id >= 0);
    CHECK(a.records[i].outcome_id < 4);
  }

  ExperimentConfig other = cfg;
  other.seed = cfg.seed + 1;
  const Dataset c = run_experiment(other);
  int diff = 0;
  for (std::size_t i = 0; i < c.records.size(); ++i) {
    if (c.records[i].outcome_id != a.records[i].outcome_id) ++diff;
  }
  CHECK(diff > 0);
}

TEST_CASE("ordered mode cycles settings in blocks") {
  ExperimentConfig cfg = base_config(Mat4::Identity());
  cfg.mode = RunMode::kOrdered;
  cfg.block_size = 3;
  cfg.n_steps = 60;
  const Dataset ds = run_experiment(cfg);
  for (const DatasetRecord& rec : ds.records) {
    CHECK(rec.setting_id == static_cast<int>((rec.step / 3) % 6));
  }
}

TEST_CASE("memoryless statistics match the product rule") {
  // identity interaction: outcomes iid with p(k|x) = tr(E_k rho_x)
  ExperimentConfig cfg = base_config(Mat4::Identity());
  cfg.n_steps = 120000;
  cfg.seed = 99;
  const Dataset ds = run_experiment(cfg);

  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(6, 4);
  for (const DatasetRecord& rec : ds.records) ++counts(rec.setting_id, rec.outcome_id);

  for (int x = 0; x < 6; ++x) {
    const double nx = counts.row(x).sum();
    REQUIRE(nx > 1000);
    double tv = 0.0;
    for (int k = 0; k < 4; ++k) {
      const double p = (cfg.povm.effects[k] * cfg.ensemble.entries[x].state.density())
                           .trace()
                           .real();
      tv += 0.5 * std::abs(counts(x, k) / nx - p);
    }
    CHECK(tv <= 3.0 / std::sqrt(nx));
  }
}

TEST_CASE("sampled statistics converge to the exact limit distribution") {
  std::mt19937_64 rng(612);
  const Mat4 u = assemble(test::random_regular_params(rng));
  ExperimentConfig cfg = base_config(u);
  cfg.n_steps = 200000;
  cfg.seed = 100;
  const Dataset ds = run_experiment(cfg);
  const ExactStatistics stats =
      exact_statistics(cfg.interaction, cfg.initial_memory, cfg.ensemble, cfg.povm);
  CHECK(!stats.initial_state_dependent);

  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(6, 4);
  for (const DatasetRecord& rec : ds.records) ++counts(rec.setting_id, rec.outcome_id);
  for (int x = 0; x < 6; ++x) {
    const double nx = counts.row(x).sum();
    double tv = 0.0;
    for (int k = 0; k < 4; ++k) tv += 0.5 * std::abs(counts(x, k) / nx - stats.probs(x, k));
    CHECK(tv <= 3.0 / std::sqrt(nx));
  }
}

TEST_CASE("exact statistics of the swap interaction are flat") {
  // swap hands out the previous memory, which relaxes to I/2
  const ExactStatistics stats =
      exact_statistics(TwoQubitUnitary(swap_gate()), QubitState(0.3, 0.1, -0.2),
                       TestEnsemble::pauli_six(), Povm::tetrahedral());
  CHECK(stats.xi_bar.bloch.norm() < 1e-10);
  for (int x = 0; x < 6; ++x)
    for (int k = 0; k < 4; ++k) CHECK(stats.probs(x, k) == doctest::Approx(0.25));
}

TEST_CASE("exact probability rows sum to one") {
  std::mt19937_64 rng(613);
  for (int trial = 0; trial < 10; ++trial) {
    const ExactStatistics stats = exact_statistics(
        TwoQubitUnitary(test::random_two_qubit_unitary(rng)),
        QubitState::maximally_mixed(), TestEnsemble::pauli_six(), Povm::tetrahedral());
    for (int x = 0; x < 6; ++x) CHECK(stats.probs.row(x).sum() == doctest::Approx(1.0));
  }
}

TEST_CASE("memory trajectory records physical pre-collision states") {
  std::mt19937_64 rng(614);
  ExperimentConfig cfg = base_config(assemble(test::random_regular_params(rng)));
  cfg.record_memory_trajectory = true;
  cfg.initial_memory = QubitState(0.0, 0.0, 0.9);
  const Dataset ds = run_experiment(cfg);
  REQUIRE(ds.memory_trajectory.has_value());
  REQUIRE(ds.memory_trajectory->size() == 1000);
  CHECK(((*ds.memory_trajectory)[0] - Vec3(0.0, 0.0, 0.9)).norm() < 1e-12);
  for (const Vec3& r : *ds.memory_trajectory) CHECK(r.norm() <= 1.0 + 1e-9);
}

TEST_CASE("dataset io round trips") {
  std::mt19937_64 rng(615);
  const ExperimentConfig cfg = base_config(test::random_two_qubit_unitary(rng));
  const Dataset ds = run_experiment(cfg);

  std::stringstream buf;
  ds.write(buf);
  const Dataset back = Dataset::read(buf);
  CHECK(back.config_fingerprint == ds.config_fingerprint);
  REQUIRE(back.records.size() == ds.records.size());
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    CHECK(back.records[i].step == ds.records[i].step);
    CHECK(back.records[i].setting_id == ds.records[i].setting_id);
    CHECK(back.records[i].outcome_id == ds.records[i].outcome_id);
  }
}

TEST_CASE("dataset reader rejects malformed input") {
  std::stringstream empty;
  CHECK_THROWS_AS(Dataset::read(empty), std::runtime_error);

  std::stringstream bad_header("#other v1 0\n0,0,0\n");
  CHECK_THROWS_AS(Dataset::read(bad_header), std::runtime_error);

  std::stringstream bad_row("#memchan-dataset v1 17\n0,0\n");
  CHECK_THROWS_AS(Dataset::read(bad_row), std::runtime_error);
}
