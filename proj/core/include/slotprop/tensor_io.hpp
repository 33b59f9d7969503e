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

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "slotprop/common.hpp"

namespace slotprop {

/// Binary tensor block: little-endian 16-byte header (magic "PRSF", u32 rows,
/// u32 cols, u32 flags) followed by rows*cols values, row-major.
/// flags == 0 stores float32; flags bit 0 stores float64.
enum class Precision : std::uint32_t { kFloat32 = 0, kFloat64 = 1 };

void write_tensor(std::ostream& out, const Mat& m, Precision precision = Precision::kFloat32);
Mat read_tensor(std::istream& in);

/// Feature files are single float32 tensor blocks (L rows, C columns).
void write_feature_file(const std::filesystem::path& path, const Mat& features);
Mat read_feature_file(const std::filesystem::path& path);

/// Ordered name -> tensor archive used for checkpoints and label caches.
/// Layout: magic "PRSK", u32 version, u32 count, then per entry u32 name length,
/// name bytes, and one tensor block.
using TensorArchive = std::vector<std::pair<std::string, Mat>>;

void save_archive(const std::filesystem::path& path, const TensorArchive& archive,
                  Precision precision = Precision::kFloat64);
TensorArchive load_archive(const std::filesystem::path& path);

}  // namespace slotprop
