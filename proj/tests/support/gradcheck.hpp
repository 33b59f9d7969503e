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

// Central finite-difference check of the full training objective against the
// analytic gradients left in each parameter by batch_objective.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "slotprop/labels.hpp"
#include "slotprop/model.hpp"
#include "slotprop/training.hpp"

namespace slotprop::testing {

struct GradCheckReport {
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  std::string worst_param;
  Eigen::Index worst_index = 0;
};

/// Relative error with a floor on the denominator so that entries whose true
/// gradient is ~0 are judged by absolute error instead.
inline double relative_error(double analytic, double numeric, double floor = 1e-7) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

inline ModelConfig tiny_model_config() {
  ModelConfig cfg;
  cfg.slots.feature_dim = 3;
  cfg.slots.input_dim = 4;
  cfg.slots.embed_dim = 4;
  cfg.slots.out_dim = 4;
  cfg.slots.scales = {2};
  cfg.slots.iterations = 1;
  cfg.heads.max_duration = 4;
  cfg.heads.align_bins = 4;
  cfg.heads.hidden = 16;
  return cfg;
}

/// Random sequences of length L with labels from random instances (dt = 1 s).
inline std::vector<TrainingSample> random_samples(std::mt19937_64& gen, int count, int L, int channels, int D,
                                                  bool pad_last = true) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<TrainingSample> out;
  for (int k = 0; k < count; ++k) {
    TrainingSample s;
    s.video_id = "v" + std::to_string(k);
    s.valid_length = (pad_last && k == count - 1 && L > 4) ? L - 2 : L;
    s.features = Mat::Zero(L, channels);
    for (int i = 0; i < s.valid_length; ++i)
      for (int c = 0; c < channels; ++c) s.features(i, c) = n(gen);
    const double t0 = u(gen) * (s.valid_length - 3);
    const double t1 = std::min<double>(s.valid_length, t0 + 1.0 + u(gen) * 3.0);
    std::vector<GroundTruthInstance> inst{{t0, t1, ""}};
    s.boundary = boundary_labels(inst, L, 1.0);
    for (int i = s.valid_length; i < L; ++i) s.boundary.start(i) = s.boundary.end(i) = 0.0;
    s.anchors = proposal_label_map(inst, D, L, 1.0, s.valid_length);
    out.push_back(std::move(s));
  }
  return out;
}

inline GradCheckReport check_gradients(SlotProposalModel& model, const std::vector<TrainingSample>& samples,
                                       const TrainConfig& config, double h = 1e-4) {
  std::vector<const TrainingSample*> batch;
  for (const auto& s : samples) batch.push_back(&s);
  batch_objective(model, batch, config, true, true);

  struct Entry {
    std::string name;
    Param* param;
  };
  std::vector<Entry> params;
  model.visit([&](const std::string& name, Param& p) {
    if (p.trainable) params.push_back({name, &p});
  });
  std::vector<Mat> analytic;
  for (const auto& e : params) analytic.push_back(e.param->grad);

  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Mat& value = params[k].param->value;
    for (Eigen::Index idx = 0; idx < value.size(); ++idx) {
      double& w = value.data()[idx];
      const double saved = w;
      w = saved + h;
      const double up = batch_objective(model, batch, config, true, false).total;
      w = saved - h;
      const double down = batch_objective(model, batch, config, true, false).total;
      w = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double err = relative_error(analytic[k].data()[idx], numeric);
      ++report.checked;
      if (err > report.max_rel_error) {
        report.max_rel_error = err;
        report.worst_param = params[k].name;
        report.worst_index = idx;
      }
    }
  }
  return report;
}

}  // namespace slotprop::testing
