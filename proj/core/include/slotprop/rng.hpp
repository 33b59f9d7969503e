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
#include <random>
#include <string_view>

namespace slotprop {

/// 64-bit FNV-1a over the bytes of `text`.
std::uint64_t stable_hash(std::string_view text) noexcept;

/// Mixes a root seed with a component name into an independent substream seed.
std::uint64_t derive_seed(std::uint64_t root, std::string_view component) noexcept;
std::uint64_t derive_seed(std::uint64_t root, std::string_view component, std::uint64_t index) noexcept;

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t root, std::string_view component) {
  return Rng(derive_seed(root, component));
}

}  // namespace slotprop
