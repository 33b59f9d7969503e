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

#include "slotprop/model.hpp"

namespace slotprop {

BoundaryScores ModelOutput::boundary_scores(int b, int valid_length) const {
  if (valid_length < 0) valid_length = seq_len;
  BoundaryScores out{boundary.block(static_cast<Eigen::Index>(b) * seq_len, 0, seq_len, 1),
                     boundary.block(static_cast<Eigen::Index>(b) * seq_len, 1, seq_len, 1)};
  for (int l = valid_length; l < seq_len; ++l) out.start(l) = out.end(l) = 0.0;
  return out;
}

ConfidenceMaps ModelOutput::confidence_maps(int b, int valid_length) const {
  if (valid_length < 0) valid_length = seq_len;
  const Eigen::Index cells = static_cast<Eigen::Index>(max_duration) * seq_len;
  ConfidenceMaps maps;
  maps.cls = Eigen::Map<const Mat>(cls.data() + b * cells, max_duration, seq_len);
  maps.com = Eigen::Map<const Mat>(com.data() + b * cells, max_duration, seq_len);
  maps.valid.setConstant(max_duration, seq_len, false);
  for (int d = 1; d <= max_duration; ++d) {
    for (int l = 0; l < seq_len; ++l) {
      const bool ok = l + d <= valid_length;
      maps.valid(d - 1, l) = ok;
      if (!ok) maps.cls(d - 1, l) = maps.com(d - 1, l) = 0.0;
    }
  }
  return maps;
}

SlotProposalModel::SlotProposalModel(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  if (config.heads.max_duration < 1 || config.heads.align_bins < 1 || config.heads.hidden < 1) {
    throw InvalidArgument("head sizes must be positive");
  }
  Rng rng(derive_seed(seed, "model/init"));
  backbone = PyramidSlotAttention(config.slots, rng);
  boundary_head = BoundaryHead(config.slots.embed_dim, rng);
  cls_head = ConfidenceHead(config.slots.embed_dim, config.heads.hidden, rng);
  com_head = ConfidenceHead(config.slots.embed_dim, config.heads.hidden, rng);
}

const ProposalAligner& SlotProposalModel::aligner(int seq_len) {
  auto it = aligners_.find(seq_len);
  if (it == aligners_.end()) {
    it = aligners_.emplace(seq_len, ProposalAligner(config_.heads.max_duration, seq_len, config_.heads.align_bins))
             .first;
  }
  return it->second;
}

ModelOutput SlotProposalModel::forward(const Mat& x, int seq_len, bool training) {
  config_.slots.validate(seq_len);
  if (x.cols() != config_.slots.feature_dim) {
    throw InvalidArgument("model expects " + std::to_string(config_.slots.feature_dim) + " feature channels, got " +
                          std::to_string(x.cols()));
  }
  seq_len_ = seq_len;
  ModelOutput out;
  out.seq_len = seq_len;
  out.batch = static_cast<int>(x.rows() / seq_len);
  out.max_duration = config_.heads.max_duration;

  const Mat slots = backbone.forward(x, seq_len, training);
  out.boundary = boundary_head.forward(slots, seq_len);
  const Mat features = aligner(seq_len).forward(slots);
  out.cls = cls_head.forward(features);
  out.com = com_head.forward(features);
  return out;
}

void SlotProposalModel::backward(const ModelGradient& grad) {
  const auto& align = aligner(seq_len_);
  Mat d_features = cls_head.backward(grad.cls);
  d_features += com_head.backward(grad.com);
  Mat d_slots = align.backward(d_features);
  d_slots += boundary_head.backward(grad.boundary);
  backbone.backward(d_slots);
}

void SlotProposalModel::visit(const Visitor& f) {
  backbone.visit("slots", f);
  boundary_head.visit("boundary", f);
  cls_head.visit("cls", f);
  com_head.visit("com", f);
}

void SlotProposalModel::zero_grad() {
  visit([](const std::string&, Param& p) { p.zero_grad(); });
}

double SlotProposalModel::l2_norm() {
  double sum = 0.0;
  visit([&](const std::string&, Param& p) {
    if (p.trainable) sum += p.value.squaredNorm();
  });
  return sum;
}

void SlotProposalModel::add_l2_grad(double scale) {
  visit([&](const std::string&, Param& p) {
    if (p.trainable) p.grad += 2.0 * scale * p.value;
  });
}

TensorArchive SlotProposalModel::export_parameters() {
  TensorArchive archive;
  visit([&](const std::string& name, Param& p) { archive.emplace_back(name, p.value); });
  return archive;
}

void SlotProposalModel::import_parameters(const TensorArchive& archive) {
  std::map<std::string, const Mat*> lookup;
  for (const auto& [name, tensor] : archive) lookup.emplace(name, &tensor);
  visit([&](const std::string& name, Param& p) {
    const auto it = lookup.find(name);
    if (it == lookup.end()) throw FormatError("checkpoint is missing parameter " + name);
    const Mat& src = *it->second;
    if (src.rows() != p.value.rows() || src.cols() != p.value.cols()) {
      throw FormatError("parameter " + name + " has shape " + std::to_string(src.rows()) + "x" +
                        std::to_string(src.cols()) + " in the checkpoint but the model expects " +
                        std::to_string(p.value.rows()) + "x" + std::to_string(p.value.cols()));
    }
    p.value = src;
  });
}

}  // namespace slotprop
