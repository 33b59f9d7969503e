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

#include "slotprop/tensor_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace slotprop {
namespace {

constexpr std::array<char, 4> kTensorMagic{'P', 'R', 'S', 'F'};
constexpr std::array<char, 4> kArchiveMagic{'P', 'R', 'S', 'K'};
constexpr std::uint32_t kArchiveVersion = 1;

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> bytes{};
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& in, const char* what) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(T))) {
    throw FormatError(std::string("truncated tensor data while reading ") + what);
  }
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

void write_tensor(std::ostream& out, const Mat& m, Precision precision) {
  if (m.rows() > std::numeric_limits<std::uint32_t>::max() ||
      m.cols() > std::numeric_limits<std::uint32_t>::max()) {
    throw InvalidArgument("tensor too large for u32 header");
  }
  out.write(kTensorMagic.data(), kTensorMagic.size());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(precision));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (precision == Precision::kFloat64) {
        put_le<double>(out, m(r, c));
      } else {
        put_le<float>(out, static_cast<float>(m(r, c)));
      }
    }
  }
}

Mat read_tensor(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() == 0) throw FormatError("empty tensor stream");
  if (in.gcount() != 4 || magic != kTensorMagic) throw FormatError("bad tensor magic (expected PRSF)");
  const auto rows = get_le<std::uint32_t>(in, "header");
  const auto cols = get_le<std::uint32_t>(in, "header");
  const auto flags = get_le<std::uint32_t>(in, "header");
  if (flags > 1) throw FormatError("unsupported tensor flags " + std::to_string(flags));
  const bool f64 = (flags & 1U) != 0;
  Mat m(rows, cols);
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c) {
      const double v = f64 ? get_le<double>(in, "payload") : static_cast<double>(get_le<float>(in, "payload"));
      if (!std::isfinite(v)) {
        throw FormatError("non-finite value at row " + std::to_string(r) + ", column " + std::to_string(c));
      }
      m(r, c) = v;
    }
  }
  return m;
}

void write_feature_file(const std::filesystem::path& path, const Mat& features) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  write_tensor(out, features, Precision::kFloat32);
  if (!out) throw IoError("write failed: " + path.string());
}

Mat read_feature_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open feature file: " + path.string());
  try {
    Mat m = read_tensor(in);
    if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after payload");
    return m;
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_archive(const std::filesystem::path& path, const TensorArchive& archive, Precision precision) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(kArchiveMagic.data(), kArchiveMagic.size());
  put_le<std::uint32_t>(out, kArchiveVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(archive.size()));
  for (const auto& [name, tensor] : archive) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_tensor(out, tensor, precision);
  }
  if (!out) throw IoError("write failed: " + path.string());
}

TensorArchive load_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open archive: " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != 4 || magic != kArchiveMagic) throw FormatError(path.string() + ": bad archive magic");
  const auto version = get_le<std::uint32_t>(in, "archive header");
  if (version != kArchiveVersion) throw FormatError(path.string() + ": unsupported archive version");
  const auto count = get_le<std::uint32_t>(in, "archive header");
  TensorArchive archive;
  archive.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = get_le<std::uint32_t>(in, "entry name");
    std::string name(len, '\0');
    in.read(name.data(), len);
    if (in.gcount() != static_cast<std::streamsize>(len)) throw FormatError(path.string() + ": truncated entry name");
    archive.emplace_back(std::move(name), read_tensor(in));
  }
  return archive;
}

}  // namespace slotprop
