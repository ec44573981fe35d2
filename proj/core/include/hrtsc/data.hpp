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

#ifndef HRTSC_DATA_HPP
#define HRTSC_DATA_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hrtsc/hmm.hpp"

namespace hrtsc {

/// Paired hand trajectories of the observed partner (human) and the
/// responding partner (robot), positions in meters.
struct Demonstration {
  Matrix human_pos;  // T x 3
  Matrix robot_pos;  // T x 3
  double rate_hz = 40.0;
  std::string label;

  Index length() const { return human_pos.rows(); }
  /// Throws DataError unless both trajectories share T >= 2 and are finite.
  void validate() const;
};

struct Dataset {
  std::vector<Demonstration> demos;
  std::string name;
};

/// Feature layout: [human pos(3), human dpos(3), robot pos(3), robot dpos(3)].
inline constexpr Index kFeatureDim = 12;
inline constexpr Index kRobotPosOffset = 6;

/// Frames of one demonstration in the 12-column feature layout.
struct FeatureSequence {
  Matrix frames;  // T x 12
  DimensionSplit split;

  Matrix human() const { return frames.leftCols(6); }
  Matrix robot() const { return frames.rightCols(6); }
  Matrix robot_positions() const { return frames.middleCols(kRobotPosOffset, 3); }
};

/// human = 0..5, robot = 6..11.
DimensionSplit feature_split();

/// Positions plus per-frame position differences; the difference at frame 0
/// is zero.
FeatureSequence build_features(const Demonstration& demo);
std::vector<Sequence> build_feature_frames(const Dataset& ds);

/// CSV with header `demo_id,t,hx,hy,hz,rx,ry,rz,label`, rows sorted by
/// (demo_id, t), t starting at 0 with unit stride.
Dataset read_csv(std::istream& in, std::string name = {});
Dataset load_csv(const std::filesystem::path& path);
void write_csv(std::ostream& out, const Dataset& ds);
void save_csv(const std::filesystem::path& path, const Dataset& ds);

struct BatchSplit {
  Dataset train;
  Dataset test;
};

/// Draws `n` training demonstrations without replacement; the rest form the
/// test set. Both keep the original demonstration order.
BatchSplit sample_batch(const Dataset& ds, std::size_t n, std::uint64_t seed);

enum class InteractionKind { kHandshake, kRocketFistbump, kParachuteFistbump };

std::string_view to_string(InteractionKind kind);
/// Accepts "handshake", "rocket_fistbump", "parachute_fistbump".
InteractionKind parse_interaction_kind(std::string_view name);
/// Number of phases each archetype is built from.
int phase_count(InteractionKind kind);

struct SyntheticCorpus {
  Dataset dataset;
  /// Per demonstration, the first frame of every phase after the first
  /// (strictly increasing, inside (0, T)).
  std::vector<std::vector<Index>> boundaries;
};

/// Frames the robot trails the human by.
inline constexpr Index kRobotLagFrames = 2;

/// Phase-structured paired interactions at 40 Hz with +-20% phase duration
/// jitter and i.i.d. Gaussian position noise of `noise_sigma` meters.
SyntheticCorpus synth_generate(InteractionKind kind, std::size_t n_demos, double noise_sigma,
                               std::uint64_t seed);

void write_boundaries_csv(std::ostream& out, const SyntheticCorpus& corpus);

}  // namespace hrtsc

#endif  // HRTSC_DATA_HPP
