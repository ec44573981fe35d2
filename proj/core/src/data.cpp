// Copyright 2026 The hrtsc Authors
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

#include "hrtsc/data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "hrtsc/errors.hpp"

namespace hrtsc {
namespace {

constexpr std::array<std::string_view, 9> kColumns = {"demo_id", "t",  "hx", "hy",   "hz",
                                                      "rx",      "ry", "rz", "label"};

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

long long parse_int(std::string_view s, std::string_view column, std::size_t row) {
  s = trim(s);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError("column '" + std::string(column) + "': invalid integer '" + std::string(s) + "'",
                    row);
  }
  return v;
}

double parse_real(std::string_view s, std::string_view column, std::size_t row) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError("column '" + std::string(column) + "': invalid number '" + std::string(s) + "'",
                    row);
  }
  if (!std::isfinite(v)) {
    throw DataError("column '" + std::string(column) + "': non-finite value", row);
  }
  return v;
}

void append_real(std::string& out, double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), ptr);
}

using Vec3 = Eigen::Vector3d;

double smoothstep(double s) { return s * s * (3.0 - 2.0 * s); }

Vec3 lerp(const Vec3& a, const Vec3& b, double w) { return a + w * (b - a); }

enum class Agent { kHuman, kRobot };

// Frames on each side of a phase boundary spent carrying the hand from one
// phase's region into the next. The carry arcs sideways by kTransitArc
// metres at its midpoint, as a reaching hand does.
constexpr double kTransitHalfWidth = 2.0;
constexpr double kTransitArc = 0.15;

std::vector<double> nominal_durations(InteractionKind kind) {
  switch (kind) {
    case InteractionKind::kHandshake:
      return {30.0, 48.0, 30.0};
    case InteractionKind::kRocketFistbump:
      return {30.0, 14.0, 30.0, 30.0};
    case InteractionKind::kParachuteFistbump:
      return {30.0, 14.0, 48.0, 30.0};
  }
  return {};
}

// Partners stand at x = 0 (human) and x = 1 (robot), facing each other; the
// hands meet at x = 0.5, y = 0. Free-hand regions of the robot are the
// human's mirrored through that contact point.
Vec3 free_hand(Agent agent, const Vec3& human) {
  return agent == Agent::kHuman ? human : Vec3(1.0 - human.x(), -human.y(), human.z());
}

// Where the hand is at progress s in [0, 1] of `phase`, ignoring transits.
Vec3 phase_anchor(InteractionKind kind, Agent agent, int phase, double s) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  switch (kind) {
    case InteractionKind::kHandshake: {
      const Vec3 grip(0.5, 0.0, 1.05);
      if (phase == 0) return free_hand(agent, lerp({0.28, -0.16, 0.90}, {0.36, -0.10, 0.96}, s));
      if (phase == 1) return grip + Vec3(0.0, 0.0, 0.04 * std::sin(kTwoPi * 2.0 * s));
      return free_hand(agent, lerp({0.30, 0.12, 0.86}, {0.22, 0.18, 0.80}, s));
    }
    case InteractionKind::kRocketFistbump: {
      const Vec3 bump(0.5, 0.0, 0.95);
      if (phase == 0) return free_hand(agent, lerp({0.28, -0.14, 0.82}, {0.36, -0.08, 0.88}, s));
      if (phase == 1) return bump + Vec3(0.0, 0.0, 0.01 * std::sin(std::numbers::pi * s));
      if (phase == 2) return lerp({0.5, 0.0, 1.35}, {0.5, 0.0, 1.40}, s);
      return free_hand(agent, lerp({0.32, 0.10, 1.15}, {0.26, 0.14, 1.08}, s));
    }
    case InteractionKind::kParachuteFistbump: {
      const Vec3 bump(0.5, 0.0, 1.45);
      if (phase == 0) return free_hand(agent, lerp({0.28, -0.14, 1.15}, {0.36, -0.08, 1.25}, s));
      if (phase == 1) return bump + Vec3(0.0, 0.0, 0.01 * std::sin(std::numbers::pi * s));
      if (phase == 2) {
        const double sway = 0.06 * std::exp(-2.0 * s) * std::sin(kTwoPi * 2.5 * s);
        return lerp({0.5, 0.0, 1.30}, {0.5, 0.0, 1.18}, s) + Vec3(sway, 0.0, 0.0);
      }
      return free_hand(agent, lerp({0.30, 0.12, 0.95}, {0.22, 0.18, 0.88}, s));
    }
  }
  return Vec3::Zero();
}

// Position at (fractional) frame t given phase start frames `starts`
// (starts.back() is the sequence length).
Vec3 trajectory_position(InteractionKind kind, Agent agent, const std::vector<Index>& starts,
                         double t) {
  const auto phases = static_cast<int>(starts.size()) - 1;
  auto progress = [&](int p) {
    const double a = static_cast<double>(starts[static_cast<std::size_t>(p)]);
    const double b = static_cast<double>(starts[static_cast<std::size_t>(p) + 1]);
    return std::clamp((t - a) / (b - a), 0.0, 1.0);
  };
  int p = 0;
  while (p + 1 < phases && t >= static_cast<double>(starts[static_cast<std::size_t>(p) + 1])) ++p;
  // At most one boundary is within reach, so blend across whichever is.
  int q = p;
  if (p + 1 < phases &&
      t >= static_cast<double>(starts[static_cast<std::size_t>(p) + 1]) - kTransitHalfWidth) {
    q = p + 1;
  }
  const double u =
      (t - static_cast<double>(starts[static_cast<std::size_t>(q)]) + kTransitHalfWidth) /
      (2.0 * kTransitHalfWidth);
  if (q == 0 || u >= 1.0) return phase_anchor(kind, agent, p, progress(p));
  Vec3 x = lerp(phase_anchor(kind, agent, q - 1, 1.0),
                phase_anchor(kind, agent, q, progress(q)), smoothstep(u));
  x.y() += (agent == Agent::kHuman ? 1.0 : -1.0) * kTransitArc * std::sin(std::numbers::pi * u);
  return x;
}

}  // namespace

void Demonstration::validate() const {
  if (human_pos.cols() != 3 || robot_pos.cols() != 3) {
    throw DataError("demonstration '" + label + "': positions must have 3 columns");
  }
  if (human_pos.rows() != robot_pos.rows()) {
    throw DataError("demonstration '" + label + "': human and robot lengths differ");
  }
  if (human_pos.rows() < 2) {
    throw DataError("demonstration '" + label + "' has " + std::to_string(human_pos.rows()) +
                    " frame(s), at least 2 are required");
  }
  if (!human_pos.allFinite() || !robot_pos.allFinite()) {
    throw DataError("demonstration '" + label + "' contains non-finite values");
  }
}

DimensionSplit feature_split() { return {{0, 1, 2, 3, 4, 5}, {6, 7, 8, 9, 10, 11}}; }

FeatureSequence build_features(const Demonstration& demo) {
  const Index T = demo.length();
  FeatureSequence fs;
  fs.frames.resize(T, kFeatureDim);
  fs.split = feature_split();
  fs.frames.middleCols(0, 3) = demo.human_pos;
  fs.frames.middleCols(6, 3) = demo.robot_pos;
  fs.frames.row(0).segment(3, 3).setZero();
  fs.frames.row(0).segment(9, 3).setZero();
  for (Index t = 1; t < T; ++t) {
    fs.frames.row(t).segment(3, 3) = demo.human_pos.row(t) - demo.human_pos.row(t - 1);
    fs.frames.row(t).segment(9, 3) = demo.robot_pos.row(t) - demo.robot_pos.row(t - 1);
  }
  return fs;
}

std::vector<Sequence> build_feature_frames(const Dataset& ds) {
  std::vector<Sequence> out;
  out.reserve(ds.demos.size());
  for (const auto& d : ds.demos) out.push_back(build_features(d).frames);
  return out;
}

Dataset read_csv(std::istream& in, std::string name) {
  std::string line;
  std::size_t row = 1;
  if (!std::getline(in, line)) throw DataError("empty file: missing header", row);

  std::map<std::string, std::size_t, std::less<>> header;
  {
    const auto cells = split_commas(line);
    for (std::size_t i = 0; i < cells.size(); ++i) header.emplace(std::string(trim(cells[i])), i);
  }
  std::array<std::size_t, kColumns.size()> col{};
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    const auto it = header.find(kColumns[c]);
    if (it == header.end()) throw DataError("missing column '" + std::string(kColumns[c]) + "'", row);
    col[c] = it->second;
  }

  struct Pending {
    long long id = -1;
    std::vector<std::array<double, 6>> frames;
    std::string label;
  } cur;
  Dataset ds;
  ds.name = std::move(name);
  auto flush = [&]() {
    if (cur.id < 0) return;
    Demonstration d;
    const auto T = static_cast<Index>(cur.frames.size());
    d.human_pos.resize(T, 3);
    d.robot_pos.resize(T, 3);
    for (Index t = 0; t < T; ++t) {
      for (Index k = 0; k < 3; ++k) {
        d.human_pos(t, k) = cur.frames[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)];
        d.robot_pos(t, k) = cur.frames[static_cast<std::size_t>(t)][static_cast<std::size_t>(k + 3)];
      }
    }
    d.label = cur.label;
    try {
      d.validate();
    } catch (const DataError& e) {
      throw DataError("demo_id " + std::to_string(cur.id) + ": " + e.what());
    }
    ds.demos.push_back(std::move(d));
  };

  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() < header.size()) {
      throw DataError("expected " + std::to_string(header.size()) + " fields, found " +
                      std::to_string(cells.size()), row);
    }
    const long long id = parse_int(cells[col[0]], kColumns[0], row);
    const long long t = parse_int(cells[col[1]], kColumns[1], row);
    std::array<double, 6> values{};
    for (std::size_t k = 0; k < 6; ++k) values[k] = parse_real(cells[col[k + 2]], kColumns[k + 2], row);

    if (id != cur.id) {
      if (id < cur.id) throw DataError("rows are not sorted by demo_id", row);
      flush();
      cur = Pending{id, {}, std::string(trim(cells[col[8]]))};
    }
    if (t != static_cast<long long>(cur.frames.size())) {
      throw DataError("time index " + std::to_string(t) + " is not monotone (expected " +
                      std::to_string(cur.frames.size()) + ")", row);
    }
    cur.frames.push_back(values);
  }
  flush();
  if (ds.demos.empty()) throw DataError("file contains no demonstrations");
  return ds;
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open '" + path.string() + "' for reading");
  return read_csv(in, path.stem().string());
}

void write_csv(std::ostream& out, const Dataset& ds) {
  std::string buf = "demo_id,t,hx,hy,hz,rx,ry,rz,label\n";
  for (std::size_t id = 0; id < ds.demos.size(); ++id) {
    const auto& d = ds.demos[id];
    for (Index t = 0; t < d.length(); ++t) {
      buf += std::to_string(id);
      buf += ',';
      buf += std::to_string(t);
      for (const Matrix* m : {&d.human_pos, &d.robot_pos}) {
        for (Index k = 0; k < 3; ++k) {
          buf += ',';
          append_real(buf, (*m)(t, k));
        }
      }
      buf += ',';
      buf += d.label;
      buf += '\n';
    }
  }
  out << buf;
}

void save_csv(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot open '" + path.string() + "' for writing");
  write_csv(out, ds);
  if (!out) throw std::ios_base::failure("write to '" + path.string() + "' failed");
}

BatchSplit sample_batch(const Dataset& ds, std::size_t n, std::uint64_t seed) {
  if (n > ds.demos.size()) {
    throw DimensionError("batch of " + std::to_string(n) + " requested from " +
                         std::to_string(ds.demos.size()) + " demonstrations");
  }
  std::vector<std::size_t> order(ds.demos.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Consecutive integer seeds are spread through seed_seq before use.
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  std::mt19937_64 rng(seq);
  // Partial Fisher-Yates: the first n slots are the sample.
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  std::vector<bool> in_train(ds.demos.size(), false);
  for (std::size_t i = 0; i < n; ++i) in_train[order[i]] = true;

  BatchSplit out;
  out.train.name = ds.name;
  out.test.name = ds.name;
  for (std::size_t i = 0; i < ds.demos.size(); ++i) {
    (in_train[i] ? out.train : out.test).demos.push_back(ds.demos[i]);
  }
  return out;
}

std::string_view to_string(InteractionKind kind) {
  switch (kind) {
    case InteractionKind::kHandshake:
      return "handshake";
    case InteractionKind::kRocketFistbump:
      return "rocket_fistbump";
    case InteractionKind::kParachuteFistbump:
      return "parachute_fistbump";
  }
  return "unknown";
}

InteractionKind parse_interaction_kind(std::string_view name) {
  for (auto k : {InteractionKind::kHandshake, InteractionKind::kRocketFistbump,
                 InteractionKind::kParachuteFistbump}) {
    if (name == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown interaction kind '" + std::string(name) + "'");
}

int phase_count(InteractionKind kind) { return static_cast<int>(nominal_durations(kind).size()); }

SyntheticCorpus synth_generate(InteractionKind kind, std::size_t n_demos, double noise_sigma,
                               std::uint64_t seed) {
  if (n_demos < 1) throw std::invalid_argument("synth_generate: n_demos must be at least 1");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("synth_generate: noise_sigma must be >= 0");

  const std::vector<double> durations = nominal_durations(kind);
  // Separate streams so the noise level never changes the phase timing.
  std::mt19937_64 rng(seed);
  std::seed_seq noise_seed{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                           0x6e6f6973u};
  std::mt19937_64 noise_rng(noise_seed);
  std::uniform_real_distribution<double> jitter(0.8, 1.2);
  std::normal_distribution<double> noise(0.0, 1.0);

  SyntheticCorpus corpus;
  corpus.dataset.name = std::string(to_string(kind));
  for (std::size_t n = 0; n < n_demos; ++n) {
    std::vector<Index> starts{0};
    for (double nominal : durations) {
      const auto len = std::max<Index>(2, static_cast<Index>(std::lround(nominal * jitter(rng))));
      starts.push_back(starts.back() + len);
    }
    const Index T = starts.back();
    auto position = [&](Agent agent, Index t) {
      return trajectory_position(kind, agent, starts, static_cast<double>(std::max<Index>(t, 0)));
    };

    Demonstration d;
    d.label = std::string(to_string(kind));
    d.human_pos.resize(T, 3);
    d.robot_pos.resize(T, 3);
    for (Index t = 0; t < T; ++t) {
      d.human_pos.row(t) = position(Agent::kHuman, t).transpose();
      d.robot_pos.row(t) = position(Agent::kRobot, t - kRobotLagFrames).transpose();
    }
    if (noise_sigma > 0.0) {
      for (Index t = 0; t < T; ++t) {
        for (Index k = 0; k < 3; ++k) d.human_pos(t, k) += noise_sigma * noise(noise_rng);
        for (Index k = 0; k < 3; ++k) d.robot_pos(t, k) += noise_sigma * noise(noise_rng);
      }
    }
    corpus.dataset.demos.push_back(std::move(d));
    corpus.boundaries.emplace_back(starts.begin() + 1, starts.end() - 1);
  }
  return corpus;
}

void write_boundaries_csv(std::ostream& out, const SyntheticCorpus& corpus) {
  std::ostringstream buf;
  buf << "demo_id,phase,start_frame\n";
  for (std::size_t id = 0; id < corpus.boundaries.size(); ++id) {
    buf << id << ",0,0\n";
    for (std::size_t p = 0; p < corpus.boundaries[id].size(); ++p) {
      buf << id << ',' << p + 1 << ',' << corpus.boundaries[id][p] << '\n';
    }
  }
  out << buf.str();
}

}  // namespace hrtsc
