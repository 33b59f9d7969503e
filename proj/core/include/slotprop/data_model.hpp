// Copyright 2026 The slotprop Authors
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "slotprop/common.hpp"

namespace slotprop {

struct GroundTruthInstance {
  double t_start = 0.0;  // seconds
  double t_end = 0.0;    // seconds
  std::string label;     // empty when the category is unknown

  bool operator==(const GroundTruthInstance&) const = default;
};

struct VideoRecord {
  std::string id;
  double duration = 0.0;  // seconds
  double fps = 0.0;
  std::int64_t frame_count = 0;
  std::vector<GroundTruthInstance> instances;
};

/// Time grid of a snippet sequence.
struct SnippetGrid {
  int snippet_interval = 1;       // frames per snippet (sigma)
  double time_per_snippet = 1.0;  // seconds per snippet
};

/// L x C feature matrix plus grid metadata. Positions past `valid_length` are
/// zero padding and excluded by losses and inference.
struct SnippetFeatureSequence {
  Mat features;
  int snippet_interval = 1;
  int origin_offset = 0;  // snippet index of the window start in the full video
  double time_per_snippet = 1.0;
  int valid_length = 0;

  int length() const { return static_cast<int>(features.rows()); }
  int channels() const { return static_cast<int>(features.cols()); }
  bool is_valid(int l) const { return l >= 0 && l < valid_length; }
  /// Absolute video time (seconds) of snippet index `l` inside this sequence.
  double time_at(double l) const { return (origin_offset + l) * time_per_snippet; }
};

enum class SequenceMode { kWindowed, kRescaled };

struct ManifestEntry {
  VideoRecord video;
  std::filesystem::path feature_path;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  SequenceMode mode = SequenceMode::kWindowed;
};

/// ceil(frame_count / sigma).
std::int64_t snippet_count(std::int64_t frame_count, std::int64_t snippet_interval);

/// Loads a feature file. `expected_length` / `expected_channels` of 0 skip that check.
SnippetFeatureSequence load_feature_sequence(const std::filesystem::path& path, int expected_length,
                                             int expected_channels, SnippetGrid grid = {});
void store_feature_sequence(const std::filesystem::path& path, const SnippetFeatureSequence& seq);

/// Overlapping fixed-length windows at offsets 0, stride, 2*stride, ... plus an
/// end-aligned tail window when needed. Short inputs give one zero-padded window.
std::vector<SnippetFeatureSequence> window_sequence(const SnippetFeatureSequence& seq, int window_length = 250,
                                                    int stride = 100);

/// Linear interpolation to `target_length` rows; endpoints map exactly.
SnippetFeatureSequence rescale_sequence(const SnippetFeatureSequence& seq, int target_length = 100);

// ---------------------------------------------------------------------------
// Annotation / manifest files

using AnnotationSet = std::map<std::string, VideoRecord>;

AnnotationSet read_annotations(const std::filesystem::path& path);
void write_annotations(const std::filesystem::path& path, const AnnotationSet& annotations);

struct ManifestLine {
  std::string video_id;
  std::string feature_path;
};
std::vector<ManifestLine> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestLine>& lines);

/// Joins manifest and annotations; relative feature paths resolve against the
/// manifest directory. Throws IoError listing every missing feature path.
DatasetManifest load_dataset(const std::filesystem::path& manifest_path,
                             const std::filesystem::path& annotations_path, SequenceMode mode);

// ---------------------------------------------------------------------------
// Synthetic data

struct SynthSpec {
  int n_videos = 20;
  int length = 64;           // snippets per video
  int channels = 32;
  int max_instances = 3;
  std::uint64_t seed = 0;
  std::uint64_t pattern_seed = 0;  // fixes the class appearance across datasets
  double action_offset = 1.5;      // per-channel magnitude of the action shift
  double noise = 1.0;
  int n_classes = 1;
  int min_segment = 3;
  int max_segment = 0;  // 0 -> max(min_segment, length / 4)
  int snippet_interval = 4;
  double fps = 25.0;
};

/// Snippets over which features cross-fade between background and action.
inline constexpr int kCrossFadeSnippets = 2;

struct SyntheticVideo {
  VideoRecord record;
  Mat features;
  std::vector<std::pair<int, int>> segments;  // [start, end) snippet indices
};

SyntheticVideo generate_synthetic_video(const SynthSpec& spec, int index);

/// Writes features/<id>.prsf, annotations.json and manifest.json under `out_dir`.
DatasetManifest generate_synthetic_dataset(const SynthSpec& spec, const std::filesystem::path& out_dir);

}  // namespace slotprop
