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

#include "memchan/cartan.hpp"
#include "memchan/config.hpp"

using namespace memchan;

namespace {

AppConfig parse_text(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

}  // namespace

TEST_CASE("full config parses with every block") {
  const AppConfig cfg = parse_text(
      "# comment\n"
      "interaction.alpha = 1.0, 0.7, -0.3\n"
      "interaction.local.w2 = 0,0,1,0.5   # z rotation\n"
      "interaction.local.v1 = 1,0,0,1.2\n"
      "memory.bloch = 0.1, 0.0, -0.2\n"
      "ensemble.preset = pauli-six\n"
      "povm.preset = tetrahedral\n"
      "run.n_steps = 5000\n"
      "run.seed = 17\n"
      "run.mode = ordered\n"
      "run.block_size = 50\n"
      "run.record_trajectory = 1\n"
      "thresholds.unitary_threshold = 0.8\n"
      "thresholds.noise_scale = 4\n"
      "thresholds.min_pairs = 200\n"
      "thresholds.refine = 0\n");
  CHECK(cfg.experiment.n_steps == 5000);
  CHECK(cfg.experiment.seed == 17);
  CHECK(cfg.experiment.mode == RunMode::kOrdered);
  CHECK(cfg.experiment.block_size == 50);
  CHECK(cfg.experiment.record_memory_trajectory);
  CHECK(cfg.experiment.initial_memory.bloch.isApprox(Vec3(0.1, 0.0, -0.2)));
  CHECK(cfg.recovery.unitary_threshold == doctest::Approx(0.8));
  CHECK(cfg.recovery.noise_scale == doctest::Approx(4.0));
  CHECK(cfg.recovery.min_pairs == 200);
  CHECK(!cfg.recovery.refine);
  REQUIRE(cfg.explicit_params.has_value());
  CHECK(cfg.explicit_params->alpha.isApprox(Vec3(1.0, 0.7, -0.3)));
  CHECK(cfg.experiment.interaction.is_unitary());
  CHECK(cfg.experiment.interaction.matrix.isApprox(assemble(*cfg.explicit_params)));
}

TEST_CASE("defaults apply when keys are omitted") {
  const AppConfig cfg = parse_text("interaction.preset = identity\n");
  CHECK(cfg.experiment.interaction.matrix.isApprox(Mat4::Identity()));
  CHECK(cfg.experiment.mode == RunMode::kRandom);
  CHECK(cfg.experiment.ensemble.size() == 6);
  CHECK(cfg.experiment.povm.size() == 4);
  CHECK(cfg.recovery.unitary_threshold == doctest::Approx(0.9));
}

TEST_CASE("presets build the advertised interactions") {
  CHECK(preset_config("delay-swap", 0)
            .experiment.interaction.matrix.isApprox(swap_gate()));

  const Mat4 cnot = preset_config("controlled-not", 0).experiment.interaction.matrix;
  Mat4 expected = Mat4::Zero();
  expected(0, 0) = expected(1, 1) = 1.0;
  expected(2, 3) = expected(3, 2) = 1.0;
  CHECK(cnot.isApprox(expected));

  const Mat4 cz = preset_config("controlled-z", 0).experiment.interaction.matrix;
  Mat4 zexp = Mat4::Identity();
  zexp(3, 3) = -1.0;
  CHECK(cz.isApprox(zexp));

  const AppConfig rr = preset_config("random-regular", 5);
  CHECK(rr.experiment.interaction.is_unitary());
  const KakResult kak = kak_decompose(rr.experiment.interaction.matrix);
  CHECK(kak.params.alpha[0] <= M_PI / 2.0 - 0.1 + 1e-9);
  CHECK(std::abs(kak.params.alpha[2]) >= 0.1 - 1e-9);

  // seeded draws are reproducible and seed-sensitive
  CHECK(preset_config("random-regular", 5)
            .experiment.interaction.matrix.isApprox(rr.experiment.interaction.matrix));
  CHECK(!preset_config("random-regular", 6)
             .experiment.interaction.matrix.isApprox(rr.experiment.interaction.matrix));
}

TEST_CASE("config errors carry the offending key") {
  auto message_of = [](const std::string& text) {
    try {
      parse_text(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message_of("").find("interaction") != std::string::npos);
  CHECK(message_of("interaction.alpha = 1,2\n").find("interaction.alpha") !=
        std::string::npos);
  CHECK(message_of("interaction.preset = identity\nrun.n_steps = abc\n")
            .find("run.n_steps") != std::string::npos);
  CHECK(message_of("interaction.preset = identity\nrun.mode = shuffled\n")
            .find("run.mode") != std::string::npos);
  CHECK(message_of("interaction.preset = nope\n").find("nope") != std::string::npos);
  CHECK(message_of("interaction.preset = identity\nbogus.key = 1\n").find("bogus.key") !=
        std::string::npos);
  CHECK(message_of("interaction.preset = identity\ninteraction.alpha = 1,1,0\n")
            .find("exclusive") != std::string::npos);
  CHECK(message_of("interaction.preset = identity\nrun.seed = 1\nrun.seed = 2\n")
            .find("duplicate") != std::string::npos);
  CHECK(message_of("no equals sign here\n").find("line 1") != std::string::npos);
  // validation failures surface as config errors too
  CHECK(message_of("interaction.preset = identity\nrun.n_steps = 0\n")
            .find("n_steps") != std::string::npos);
}

TEST_CASE("written configs parse back to the same experiment") {
  AppConfig cfg = parse_text(
      "interaction.alpha = 0.9, 0.5, 0.2\n"
      "interaction.local.v2 = 0,1,0,0.8\n"
      "run.n_steps = 777\n"
      "run.seed = 3\n");
  std::ostringstream os;
  write_config(os, cfg);
  const AppConfig back = parse_text(os.str());
  CHECK(back.experiment.n_steps == 777);
  CHECK(back.experiment.seed == 3);
  CHECK((back.experiment.interaction.matrix - cfg.experiment.interaction.matrix)
            .norm() < 1e-12);

  // preset configs round trip to the identical fingerprint
  AppConfig pre = preset_config("random-regular", 11);
  pre.experiment.n_steps = 1234;
  std::ostringstream os2;
  write_config(os2, pre);
  const AppConfig back2 = parse_text(os2.str());
  CHECK(config_fingerprint(back2.experiment) == config_fingerprint(pre.experiment));
}
