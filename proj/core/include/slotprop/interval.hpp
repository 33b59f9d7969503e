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

namespace slotprop {

/// Temporal IoU of [a_start, a_end] and [b_start, b_end]; 0 when disjoint or
/// when either interval is degenerate.
double tiou(double a_start, double a_end, double b_start, double b_end) noexcept;

}  // namespace slotprop
