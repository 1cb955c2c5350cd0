// Copyright 2026 The compact-slt Authors. All Rights Reserved.
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

// Skeletal pose clips: validation, normalization, frame-rate resampling,
// truncation and the line-delimited dataset format.
//
// Keypoint order is frozen as
//   [0, 21)   left hand
//   [21, 42)  right hand
//   [42, 55)  upper body
//   [55, 85)  face
// and a frame flattens to (x0, y0, z0, x1, y1, z1, ...), 255 values.
// Missing keypoints are stored as (0, 0, 0).

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace slt {

inline constexpr int kNumKeypoints = 85;
inline constexpr int kCoordsPerKeypoint = 3;
inline constexpr int kPoseDim = kNumKeypoints * kCoordsPerKeypoint;  // 255
inline constexpr int kDefaultMaxFrames = 256;

struct KeypointRegion {
  const char* name;
  int begin;
  int count;
};

inline constexpr std::array<KeypointRegion, 4> kKeypointRegions{{
    {"left_hand", 0, 21},
    {"right_hand", 21, 21},
    {"upper_body", 42, 13},
    {"face", 55, 30},
}};

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

using PoseFrame = std::array<Keypoint, kNumKeypoints>;
using FrameVector = std::array<double, kPoseDim>;

struct PoseClip {
  std::string id;
  int fps = 24;
  // Source resolution in pixels. A normalized clip carries width = height = 1.
  int width = 1;
  int height = 1;
  std::vector<PoseFrame> frames;
  std::optional<std::string> text;
  // Set by truncate_frames when frames were dropped.
  bool truncated = false;

  friend bool operator==(const PoseClip&, const PoseClip&) = default;
};

struct NormalizeOptions {
  // z is divided by the frame width when set, left untouched otherwise.
  bool scale_z_by_width = true;
};

// x / width, y / height, z / width. Throws kInvalidDimensions for
// non-positive dimensions and kCorruptFrame (naming the keypoint) for
// non-finite input.
PoseFrame normalize_frame(const PoseFrame& frame, double width, double height,
                          NormalizeOptions options = {});

// Normalizes every frame by the clip's own width/height and marks the
// result as normalized (width = height = 1).
PoseClip normalize_clip(const PoseClip& clip, NormalizeOptions options = {});

// Uniform index subsampling: output frame i is input frame
// floor(i * clip.fps / target_fps). Upsampling is refused with kSubRateClip.
PoseClip resample_fps(const PoseClip& clip, int target_fps);

// Source indices resample_fps would pick for a clip of `length` frames.
std::vector<std::size_t> resample_indices(std::size_t length, int source_fps,
                                          int target_fps);

PoseClip truncate_frames(const PoseClip& clip,
                         int max_frames = kDefaultMaxFrames);

FrameVector flatten_frame(const PoseFrame& frame);
PoseFrame unflatten_frame(std::span<const double> values);

// Throws kCorruptFrame if any coordinate is NaN or infinite.
void validate_clip(const PoseClip& clip);

std::vector<PoseClip> load_pose_dataset(const std::filesystem::path& path);
void save_pose_dataset(std::span<const PoseClip> clips,
                       const std::filesystem::path& path);

// Single-record codec used by the dataset reader/writer. `line_number` only
// feeds error messages.
PoseClip parse_pose_record(const std::string& line, std::size_t line_number);
std::string format_pose_record(const PoseClip& clip);

}  // namespace slt
