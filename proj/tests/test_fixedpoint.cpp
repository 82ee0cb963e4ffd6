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

#include "memchan/fixedpoint.hpp"
#include "test_util.hpp"

using namespace memchan;

TEST_CASE("memory map of the identity interaction is the identity") {
  const BlochAffineMap c =
      memory_map(TwoQubitUnitary(Mat4::Identity()), TestEnsemble::pauli_six());
  CHECK((c.T - Mat3::Identity()).norm() < 1e-12);
  CHECK(c.t.norm() < 1e-12);

  const FixedPointReport fp = fixed_points(c);
  CHECK(!fp.unique);
  CHECK(fp.fixed_set_dim == 3);
}

TEST_CASE("memory map of the swap interaction resets to the average state") {
  const BlochAffineMap c =
      memory_map(TwoQubitUnitary(swap_gate()), TestEnsemble::pauli_six());
  CHECK(c.T.norm() < 1e-12);
  CHECK(c.t.norm() < 1e-12);  // average of the six-state ensemble is I/2

  const FixedPointReport fp = fixed_points(c);
  CHECK(fp.unique);
  CHECK(fp.fixed_set_dim == 0);
  CHECK(fp.fixed_point.bloch.norm() < 1e-12);
}

TEST_CASE("controlled-z dephases the memory along z") {
  Mat4 cz = Mat4::Identity();
  cz(3, 3) = -1.0;
  // memory-controlled phase: system populations decide whether Z hits the
  // memory; averaging over I/2 gives full z dephasing
  const BlochAffineMap c = memory_map(TwoQubitUnitary(cz), TestEnsemble::pauli_six());
  Mat3 expected = Mat3::Zero();
  expected(2, 2) = 1.0;
  CHECK((c.T - expected).norm() < 1e-12);
  CHECK(c.t.norm() < 1e-12);

  const FixedPointReport fp = fixed_points(c);
  CHECK(!fp.unique);
  CHECK(fp.fixed_set_dim == 1);
  // minimum-norm representative
  CHECK(fp.fixed_point.bloch.norm() < 1e-12);
}

TEST_CASE("memory map is unital and contractive for the six-state ensemble") {
  std::mt19937_64 rng(411);
  for (int trial = 0; trial < 30; ++trial) {
    const TwoQubitUnitary u(test::random_two_qubit_unitary(rng));
    const BlochAffineMap c = memory_map(u, TestEnsemble::pauli_six());
    CHECK(c.t.norm() < 1e-10);  // average test state is I/2
    const FixedPointReport fp = fixed_points(c);
    CHECK(fp.spectral_abs.maxCoeff() <= 1.0 + 1e-9);
    // the ball stays invariant
    for (int i = 0; i < 5; ++i) {
      const Vec3 r = test::random_bloch_in_ball(rng);
      CHECK(c.apply(r).norm() <= 1.0 + 1e-9);
    }
  }
}

TEST_CASE("fixed points satisfy the fixed-point equation") {
  std::mt19937_64 rng(412);
  for (int trial = 0; trial < 40; ++trial) {
    const TwoQubitUnitary u(test::random_two_qubit_unitary(rng));
    const BlochAffineMap c = memory_map(u, TestEnsemble::pauli_six());
    const FixedPointReport fp = fixed_points(c);
    CHECK((c.apply(fp.fixed_point.bloch) - fp.fixed_point.bloch).norm() < 1e-8);
    CHECK(fp.fixed_point.is_physical(1e-8));
  }
}

TEST_CASE("fixed point of a generic interaction is unique") {
  std::mt19937_64 rng(413);
  int unique_count = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const Mat4 u = assemble(test::random_regular_params(rng));
    const FixedPointReport fp =
        fixed_points(memory_map(TwoQubitUnitary(u), TestEnsemble::pauli_six()));
    if (fp.unique) ++unique_count;
  }
  CHECK(unique_count == 20);
}

TEST_CASE("iteration converges to the algebraic fixed point") {
  std::mt19937_64 rng(414);
  for (int trial = 0; trial < 20; ++trial) {
    const Mat4 u = assemble(test::random_regular_params(rng));
    const BlochAffineMap c = memory_map(TwoQubitUnitary(u), TestEnsemble::pauli_six());
    const FixedPointReport fp = fixed_points(c);
    REQUIRE(fp.unique);
    const IterateResult it =
        iterate_to_fixed_point(c, QubitState(test::random_bloch_in_ball(rng)));
    CHECK(it.converged);
    CHECK((it.state.bloch - fp.fixed_point.bloch).norm() < 1e-9);
  }
}

TEST_CASE("iteration reports non-convergence for a pure rotation") {
  // irrational rotation about z never settles from a generic start
  BlochAffineMap c;
  const double th = 1.0;
  c.T << std::cos(th), -std::sin(th), 0.0, std::sin(th), std::cos(th), 0.0, 0.0, 0.0,
      1.0;
  const IterateResult it = iterate_to_fixed_point(c, QubitState(0.5, 0.0, 0.0), 1e-12, 500);
  CHECK(!it.converged);
  CHECK(it.iterations == 500);
}

TEST_CASE("inconsistent affine systems are rejected") {
  BlochAffineMap c;  // T = I with a nonzero shift has no fixed point
  c.t = Vec3(0.1, 0.0, 0.0);
  CHECK_THROWS_AS(fixed_points(c), std::runtime_error);
}

TEST_CASE("biased ensembles give non-unital memory maps with a fixed point") {
  std::mt19937_64 rng(415);
  TestEnsemble biased;
  biased.entries.push_back({QubitState(0.0, 0.0, 1.0), 0.7});
  biased.entries.push_back({QubitState(1.0, 0.0, 0.0), 0.2});
  biased.entries.push_back({QubitState(0.0, 1.0, 0.0), 0.1});
  for (int trial = 0; trial < 10; ++trial) {
    const Mat4 u = assemble(test::random_regular_params(rng));
    const BlochAffineMap c = memory_map(TwoQubitUnitary(u), biased);
    const FixedPointReport fp = fixed_points(c);
    CHECK((c.apply(fp.fixed_point.bloch) - fp.fixed_point.bloch).norm() < 1e-8);
    CHECK(fp.fixed_point.is_physical(1e-8));
  }
}
