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

#include "slt/pose.h"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "slt/error.h"

namespace slt {
namespace {

using ordered_json = nlohmann::ordered_json;

bool is_finite(const Keypoint& k) {
  return std::isfinite(k.x) && std::isfinite(k.y) && std::isfinite(k.z);
}

std::string where(const std::string& clip_id, std::size_t frame_index) {
  return "clip '" + clip_id + "' frame " + std::to_string(frame_index);
}

}  // namespace

PoseFrame normalize_frame(const PoseFrame& frame, double width, double height,
                          NormalizeOptions options) {
  if (!(width > 0.0) || !(height > 0.0)) {
    std::ostringstream msg;
    msg << "invalid frame dimensions " << width << "x" << height;
    fail(ErrorCode::kInvalidDimensions, msg.str());
  }
  PoseFrame out;
  for (int i = 0; i < kNumKeypoints; ++i) {
    const Keypoint& k = frame[i];
    if (!is_finite(k)) {
      fail(ErrorCode::kCorruptFrame,
           "non-finite coordinate at keypoint " + std::to_string(i));
    }
    out[i].x = k.x / width;
    out[i].y = k.y / height;
    out[i].z = options.scale_z_by_width ? k.z / width : k.z;
  }
  return out;
}

PoseClip normalize_clip(const PoseClip& clip, NormalizeOptions options) {
  PoseClip out = clip;
  for (std::size_t f = 0; f < clip.frames.size(); ++f) {
    try {
      out.frames[f] =
          normalize_frame(clip.frames[f], clip.width, clip.height, options);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kCorruptFrame) throw;
      fail(e.code(), where(clip.id, f) + ": " + e.what());
    }
  }
  out.width = 1;
  out.height = 1;
  return out;
}

std::vector<std::size_t> resample_indices(std::size_t length, int source_fps,
                                          int target_fps) {
  if (target_fps < 1 || source_fps < 1) {
    fail(ErrorCode::kConfig, "frame rates must be positive");
  }
  if (source_fps < target_fps) {
    fail(ErrorCode::kSubRateClip,
         "clip at " + std::to_string(source_fps) +
             " fps is below the target rate " + std::to_string(target_fps));
  }
  const auto src = static_cast<std::uint64_t>(source_fps);
  const auto dst = static_cast<std::uint64_t>(target_fps);
  const std::uint64_t out_len = (length * dst + src - 1) / src;
  std::vector<std::size_t> indices(out_len);
  for (std::uint64_t i = 0; i < out_len; ++i) {
    indices[i] = static_cast<std::size_t>(i * src / dst);
  }
  return indices;
}

PoseClip resample_fps(const PoseClip& clip, int target_fps) {
  const auto indices =
      resample_indices(clip.frames.size(), clip.fps, target_fps);
  if (clip.fps == target_fps) return clip;
  PoseClip out = clip;
  out.fps = target_fps;
  out.frames.clear();
  out.frames.reserve(indices.size());
  for (std::size_t i : indices) out.frames.push_back(clip.frames[i]);
  return out;
}

PoseClip truncate_frames(const PoseClip& clip, int max_frames) {
  if (max_frames < 1) fail(ErrorCode::kConfig, "max_frames must be >= 1");
  PoseClip out = clip;
  const auto cap = static_cast<std::size_t>(max_frames);
  if (out.frames.size() > cap) {
    out.frames.resize(cap);
    out.truncated = true;
  }
  return out;
}

FrameVector flatten_frame(const PoseFrame& frame) {
  FrameVector v;
  for (int i = 0; i < kNumKeypoints; ++i) {
    v[3 * i + 0] = frame[i].x;
    v[3 * i + 1] = frame[i].y;
    v[3 * i + 2] = frame[i].z;
  }
  return v;
}

PoseFrame unflatten_frame(std::span<const double> values) {
  if (values.size() != static_cast<std::size_t>(kPoseDim)) {
    fail(ErrorCode::kShape, "frame vector must have " +
                                std::to_string(kPoseDim) + " values, got " +
                                std::to_string(values.size()));
  }
  PoseFrame frame;
  for (int i = 0; i < kNumKeypoints; ++i) {
    frame[i] = {values[3 * i], values[3 * i + 1], values[3 * i + 2]};
  }
  return frame;
}

void validate_clip(const PoseClip& clip) {
  if (clip.fps < 1) {
    fail(ErrorCode::kSchema, "clip '" + clip.id + "' has non-positive fps");
  }
  for (std::size_t f = 0; f < clip.frames.size(); ++f) {
    for (int k = 0; k < kNumKeypoints; ++k) {
      if (!is_finite(clip.frames[f][k])) {
        fail(ErrorCode::kCorruptFrame, where(clip.id, f) +
                                           ": non-finite coordinate at keypoint " +
                                           std::to_string(k));
      }
    }
  }
}

std::string format_pose_record(const PoseClip& clip) {
  ordered_json rec;
  rec["id"] = clip.id;
  rec["fps"] = clip.fps;
  rec["width"] = clip.width;
  rec["height"] = clip.height;
  rec["text"] = clip.text ? ordered_json(*clip.text) : ordered_json(nullptr);
  auto frames = ordered_json::array();
  for (const PoseFrame& frame : clip.frames) {
    auto kps = ordered_json::array();
    for (const Keypoint& k : frame) kps.push_back({k.x, k.y, k.z});
    frames.push_back(std::move(kps));
  }
  rec["frames"] = std::move(frames);
  if (clip.truncated) rec["truncated"] = true;
  return rec.dump();
}

PoseClip parse_pose_record(const std::string& line, std::size_t line_number) {
  const std::string at = "line " + std::to_string(line_number);
  nlohmann::json rec;
  try {
    rec = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::kParse, at + ": " + e.what());
  }
  PoseClip clip;
  try {
    if (!rec.is_object()) fail(ErrorCode::kParse, at + ": record is not an object");
    clip.id = rec.at("id").get<std::string>();
    clip.fps = rec.at("fps").get<int>();
    clip.width = rec.at("width").get<int>();
    clip.height = rec.at("height").get<int>();
    const auto& text = rec.at("text");
    if (!text.is_null()) clip.text = text.get<std::string>();
    if (auto it = rec.find("truncated"); it != rec.end()) {
      clip.truncated = it->get<bool>();
    }
    const auto& frames = rec.at("frames");
    if (!frames.is_array()) {
      fail(ErrorCode::kSchema, at + ": clip '" + clip.id + "' frames is not an array");
    }
    clip.frames.reserve(frames.size());
    for (std::size_t f = 0; f < frames.size(); ++f) {
      const auto& kps = frames[f];
      if (!kps.is_array() || kps.size() != kNumKeypoints) {
        fail(ErrorCode::kSchema,
             at + ": " + where(clip.id, f) + " has " +
                 std::to_string(kps.is_array() ? kps.size() : 0) +
                 " keypoints, expected " + std::to_string(kNumKeypoints));
      }
      PoseFrame frame;
      for (int k = 0; k < kNumKeypoints; ++k) {
        const auto& xyz = kps[k];
        if (!xyz.is_array() || xyz.size() != 3 || !xyz[0].is_number() ||
            !xyz[1].is_number() || !xyz[2].is_number()) {
          fail(ErrorCode::kSchema, at + ": " + where(clip.id, f) +
                                       " keypoint " + std::to_string(k) +
                                       " is not an [x,y,z] triple");
        }
        frame[k] = {xyz[0].get<double>(), xyz[1].get<double>(),
                    xyz[2].get<double>()};
      }
      clip.frames.push_back(frame);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, at + ": " + e.what());
  }
  if (clip.fps < 1) {
    fail(ErrorCode::kSchema, at + ": clip '" + clip.id + "' has non-positive fps");
  }
  return clip;
}

std::vector<PoseClip> load_pose_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot read dataset " + path.string());
  std::vector<PoseClip> clips;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    clips.push_back(parse_pose_record(line, line_number));
  }
  return clips;
}

void save_pose_dataset(std::span<const PoseClip> clips,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write dataset " + path.string());
  for (const PoseClip& clip : clips) out << format_pose_record(clip) << '\n';
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace slt
