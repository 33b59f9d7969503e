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

#include <benchmark/benchmark.h>

#include <random>

#include "slotprop/inference.hpp"

namespace slotprop {
namespace {

std::vector<Proposal> random_proposals(int n) {
  std::mt19937_64 gen(static_cast<std::uint64_t>(n));
  std::uniform_real_distribution<double> pos(0.0, 200.0), len(0.5, 30.0), score(0.0, 1.0);
  std::vector<Proposal> out(static_cast<std::size_t>(n));
  for (auto& p : out) {
    p.t_start = pos(gen);
    p.t_end = p.t_start + len(gen);
    p.score = score(gen);
  }
  return out;
}

void BM_Nms(benchmark::State& state) {
  const auto props = random_proposals(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(nms(props, 0.65));
}
BENCHMARK(BM_Nms)->RangeMultiplier(4)->Range(64, 4096);

void BM_SoftNms(benchmark::State& state) {
  const auto props = random_proposals(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(soft_nms(props, SoftNmsParams{}));
}
BENCHMARK(BM_SoftNms)->RangeMultiplier(4)->Range(64, 4096);

}  // namespace
}  // namespace slotprop
