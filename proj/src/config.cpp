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

#include "memchan/config.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "memchan/cartan.hpp"

namespace memchan {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<double> parse_reals(const std::string& key, const std::string& value,
                                std::size_t expected) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(trim(item), &used));
      if (used != trim(item).size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ConfigError(key + ": not a number: '" + trim(item) + "'");
    }
  }
  if (out.size() != expected) {
    throw ConfigError(key + ": expected " + std::to_string(expected) +
                      " comma-separated numbers, got " + std::to_string(out.size()));
  }
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  return parse_reals(key, value, 1)[0];
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const std::int64_t v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": not an integer: '" + value + "'");
  }
}

Mat2 local_from_axis_angle(const std::string& key, const std::string& value) {
  const std::vector<double> v = parse_reals(key, value, 4);
  Vec3 n(v[0], v[1], v[2]);
  const double norm = n.norm();
  if (norm < 1e-12) throw ConfigError(key + ": zero rotation axis");
  n /= norm;
  Mat2 gen = Mat2::Zero();
  for (int j = 0; j < 3; ++j) gen += n[j] * pauli(j);
  return std::cos(v[3] / 2.0) * Mat2::Identity() -
         Complex(0.0, std::sin(v[3] / 2.0)) * gen;
}

void axis_angle_of(const Mat2& u, Vec3& axis, double& angle) {
  const Eigen::AngleAxisd aa(rotation_from_unitary(u));
  axis = aa.axis();
  angle = aa.angle();
}

Mat4 controlled_gate(const Mat2& v) {
  // memory controls: |0><0| (x) I + |1><1| (x) v
  Mat4 u = Mat4::Identity();
  u.block<2, 2>(2, 2) = v;
  return u;
}

CartanParams random_regular_params(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  constexpr double kMargin = 0.1;
  std::uniform_real_distribution<double> uni(kMargin, M_PI / 2.0 - kMargin);
  double a = uni(rng), b = uni(rng), c = uni(rng);
  if (a < b) std::swap(a, b);
  if (b < c) std::swap(b, c);
  if (a < b) std::swap(a, b);
  std::bernoulli_distribution coin(0.5);
  CartanParams p;
  p.alpha = Vec3(a, b, coin(rng) ? c : -c);
  auto su2 = [&rng]() {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::Vector4d q(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
    q.normalize();
    Mat2 u;
    u << Complex(q[0], q[3]), Complex(q[2], q[1]), Complex(-q[2], q[1]),
        Complex(q[0], -q[3]);
    return u;
  };
  p.w2 = su2();
  p.v2 = su2();
  p.v1 = su2();
  return p;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::istream& is) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    }
    if (!kv.emplace(key, value).second) {
      throw ConfigError(key + ": duplicate key");
    }
  }
  return kv;
}

AppConfig parse_config(std::istream& is) {
  std::map<std::string, std::string> kv = parse_key_values(is);
  AppConfig cfg;

  auto take = [&kv](const std::string& key) {
    std::string value;
    const auto it = kv.find(key);
    if (it != kv.end()) {
      value = it->second;
      kv.erase(it);
    }
    return value;
  };

  // run block first: random-regular may reuse the run seed
  if (const std::string v = take("run.n_steps"); !v.empty())
    cfg.experiment.n_steps = parse_int("run.n_steps", v);
  if (const std::string v = take("run.seed"); !v.empty())
    cfg.experiment.seed = static_cast<std::uint64_t>(parse_int("run.seed", v));
  if (const std::string v = take("run.mode"); !v.empty()) {
    if (v == "random") cfg.experiment.mode = RunMode::kRandom;
    else if (v == "ordered") cfg.experiment.mode = RunMode::kOrdered;
    else throw ConfigError("run.mode: expected random or ordered, got '" + v + "'");
  }
  if (const std::string v = take("run.block_size"); !v.empty())
    cfg.experiment.block_size = parse_int("run.block_size", v);
  if (const std::string v = take("run.record_trajectory"); !v.empty())
    cfg.experiment.record_memory_trajectory = parse_int("run.record_trajectory", v) != 0;

  const std::string preset = take("interaction.preset");
  const std::string alpha_text = take("interaction.alpha");
  const std::string seed_text = take("interaction.seed");
  if (!preset.empty() && !alpha_text.empty()) {
    throw ConfigError("interaction.preset and interaction.alpha are exclusive");
  }
  if (!preset.empty()) {
    const std::uint64_t iseed = seed_text.empty()
                                    ? cfg.experiment.seed
                                    : static_cast<std::uint64_t>(
                                          parse_int("interaction.seed", seed_text));
    const AppConfig base = preset_config(preset, iseed);
    cfg.experiment.interaction = base.experiment.interaction;
    cfg.preset = preset;
  } else if (!alpha_text.empty()) {
    CartanParams p;
    const std::vector<double> a = parse_reals("interaction.alpha", alpha_text, 3);
    p.alpha = Vec3(a[0], a[1], a[2]);
    if (const std::string v = take("interaction.local.w2"); !v.empty())
      p.w2 = local_from_axis_angle("interaction.local.w2", v);
    if (const std::string v = take("interaction.local.v2"); !v.empty())
      p.v2 = local_from_axis_angle("interaction.local.v2", v);
    if (const std::string v = take("interaction.local.v1"); !v.empty())
      p.v1 = local_from_axis_angle("interaction.local.v1", v);
    cfg.experiment.interaction = TwoQubitUnitary(assemble(p));
    cfg.explicit_params = p;
  } else {
    throw ConfigError("interaction.preset or interaction.alpha is required");
  }

  if (const std::string v = take("memory.bloch"); !v.empty()) {
    const std::vector<double> r = parse_reals("memory.bloch", v, 3);
    cfg.experiment.initial_memory = QubitState(r[0], r[1], r[2]);
  }
  if (const std::string v = take("ensemble.preset"); !v.empty()) {
    if (v != "pauli-six")
      throw ConfigError("ensemble.preset: unknown preset '" + v + "'");
  }
  if (const std::string v = take("povm.preset"); !v.empty()) {
    if (v != "tetrahedral")
      throw ConfigError("povm.preset: unknown preset '" + v + "'");
  }

  if (const std::string v = take("thresholds.unitary_threshold"); !v.empty())
    cfg.recovery.unitary_threshold = parse_real("thresholds.unitary_threshold", v);
  if (const std::string v = take("thresholds.t_unital_tol"); !v.empty())
    cfg.recovery.t_unital_tol = parse_real("thresholds.t_unital_tol", v);
  if (const std::string v = take("thresholds.noise_scale"); !v.empty())
    cfg.recovery.noise_scale = parse_real("thresholds.noise_scale", v);
  if (const std::string v = take("thresholds.degenerate_tol"); !v.empty())
    cfg.recovery.degenerate_tol = parse_real("thresholds.degenerate_tol", v);
  if (const std::string v = take("thresholds.s_min"); !v.empty())
    cfg.recovery.s_min = parse_real("thresholds.s_min", v);
  if (const std::string v = take("thresholds.m_min"); !v.empty())
    cfg.recovery.m_min = parse_real("thresholds.m_min", v);
  if (const std::string v = take("thresholds.min_pairs"); !v.empty())
    cfg.recovery.min_pairs = parse_int("thresholds.min_pairs", v);
  if (const std::string v = take("thresholds.refine"); !v.empty())
    cfg.recovery.refine = parse_int("thresholds.refine", v) != 0;

  if (!kv.empty()) {
    throw ConfigError(kv.begin()->first + ": unknown key");
  }
  try {
    cfg.experiment.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

AppConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  return parse_config(is);
}

AppConfig preset_config(const std::string& name, std::uint64_t seed) {
  AppConfig cfg;
  cfg.preset = name;
  cfg.experiment.seed = seed;
  if (name == "identity") {
    cfg.experiment.interaction = TwoQubitUnitary(Mat4::Identity());
  } else if (name == "delay-swap") {
    cfg.experiment.interaction = TwoQubitUnitary(swap_gate());
  } else if (name == "controlled-not") {
    cfg.experiment.interaction = TwoQubitUnitary(controlled_gate(pauli(0)));
  } else if (name == "controlled-z") {
    cfg.experiment.interaction = TwoQubitUnitary(controlled_gate(pauli(2)));
  } else if (name == "random-regular") {
    cfg.experiment.interaction = TwoQubitUnitary(assemble(random_regular_params(seed)));
  } else {
    throw ConfigError("interaction.preset: unknown preset '" + name + "'");
  }
  return cfg;
}

void write_config(std::ostream& os, const AppConfig& config) {
  os.precision(17);
  if (!config.preset.empty()) {
    os << "interaction.preset = " << config.preset << "\n";
    if (config.preset == "random-regular")
      os << "interaction.seed = " << config.experiment.seed << "\n";
  } else {
    if (!config.explicit_params) {
      throw ConfigError("write_config: no preset and no explicit parameters");
    }
    const CartanParams& p = *config.explicit_params;
    os << "interaction.alpha = " << p.alpha[0] << "," << p.alpha[1] << ","
       << p.alpha[2] << "\n";
    const std::pair<const char*, const Mat2*> locals[] = {
        {"w2", &p.w2}, {"v2", &p.v2}, {"v1", &p.v1}};
    for (const auto& [label, u] : locals) {
      Vec3 axis;
      double angle;
      axis_angle_of(*u, axis, angle);
      os << "interaction.local." << label << " = " << axis[0] << "," << axis[1] << ","
         << axis[2] << "," << angle << "\n";
    }
  }
  const Vec3& r = config.experiment.initial_memory.bloch;
  os << "memory.bloch = " << r[0] << "," << r[1] << "," << r[2] << "\n";
  os << "ensemble.preset = pauli-six\n";
  os << "povm.preset = tetrahedral\n";
  os << "run.n_steps = " << config.experiment.n_steps << "\n";
  os << "run.seed = " << config.experiment.seed << "\n";
  os << "run.mode = "
     << (config.experiment.mode == RunMode::kRandom ? "random" : "ordered") << "\n";
  os << "run.block_size = " << config.experiment.block_size << "\n";
  os << "run.record_trajectory = "
     << (config.experiment.record_memory_trajectory ? 1 : 0) << "\n";
  os << "thresholds.unitary_threshold = " << config.recovery.unitary_threshold << "\n";
  os << "thresholds.t_unital_tol = " << config.recovery.t_unital_tol << "\n";
  os << "thresholds.noise_scale = " << config.recovery.noise_scale << "\n";
  os << "thresholds.degenerate_tol = " << config.recovery.degenerate_tol << "\n";
  os << "thresholds.s_min = " << config.recovery.s_min << "\n";
  os << "thresholds.m_min = " << config.recovery.m_min << "\n";
  os << "thresholds.min_pairs = " << config.recovery.min_pairs << "\n";
  os << "thresholds.refine = " << (config.recovery.refine ? 1 : 0) << "\n";
}

}  // namespace memchan
