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

#include "slotprop/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace slotprop {
namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected) {
  throw InvalidArgument("config key '" + key + "': cannot parse '" + value + "' (expected " + expected + ")");
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) bad_value(key, v, "a number");
    return d;
  } catch (const std::logic_error&) {
    bad_value(key, v, "a number");
  }
}

long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "true|false");
}

// Shortest decimal that parses back to the same double.
std::string fmt(double d) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, d);
    if (std::stod(buf) == d) break;
  }
  return buf;
}

template <typename E>
struct EnumNames {
  std::vector<std::pair<E, const char*>> names;

  E parse(const std::string& key, const std::string& v) const {
    std::string expected;
    for (const auto& [e, n] : names) {
      if (v == n) return e;
      expected += (expected.empty() ? "" : "|") + std::string(n);
    }
    bad_value(key, v, expected);
  }
  std::string render(E e) const {
    for (const auto& [x, n] : names)
      if (x == e) return n;
    return "?";
  }
};

const EnumNames<SequenceMode> kModes{{{SequenceMode::kWindowed, "windowed"}, {SequenceMode::kRescaled, "rescaled"}}};
const EnumNames<AttentionVariant> kVariants{
    {{AttentionVariant::kRegion, "region"}, {AttentionVariant::kSimilarity, "similarity"}}};
const EnumNames<Fusion> kFusions{{{Fusion::kMean, "mean"}, {Fusion::kSum, "sum"}}};
const EnumNames<SoftmaxAxis> kAxes{{{SoftmaxAxis::kSource, "source"}, {SoftmaxAxis::kTarget, "target"}}};
const EnumNames<Suppression> kSuppressions{
    {{Suppression::kNone, "none"}, {Suppression::kNms, "nms"}, {Suppression::kSoftNms, "soft_nms"}}};
const EnumNames<SoftNmsDecay> kDecays{{{SoftNmsDecay::kGaussian, "gaussian"}, {SoftNmsDecay::kLinear, "linear"}}};
const EnumNames<CandidateRule> kRules{{{CandidateRule::kOr, "or"}, {CandidateRule::kAnd, "and"}}};
const EnumNames<EvalMode> kEvalModes{{{EvalMode::kThumos, "thumos"}, {EvalMode::kAnet, "anet"}}};

std::string render_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

std::vector<int> parse_ints(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& item : split(v, ',')) out.push_back(static_cast<int>(parse_int(key, item)));
  if (out.empty()) bad_value(key, v, "a comma-separated integer list");
  return out;
}

std::string render_schedule(const std::vector<LrSegment>& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    out += (i ? "," : "") + fmt(s[i].lr);
    if (s[i].epochs > 0) out += ":" + std::to_string(s[i].epochs);
  }
  return out;
}

std::vector<LrSegment> parse_schedule(const std::string& key, const std::string& v) {
  std::vector<LrSegment> out;
  for (const auto& item : split(v, ',')) {
    const auto colon = item.find(':');
    LrSegment seg;
    seg.lr = parse_double(key, trim(item.substr(0, colon)));
    if (colon != std::string::npos) seg.epochs = static_cast<int>(parse_int(key, trim(item.substr(colon + 1))));
    out.push_back(seg);
  }
  if (out.empty()) bad_value(key, v, "lr[:epochs],...");
  return out;
}

struct Key {
  const char* name;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define INT_KEY(field) \
  Key{#field, [](RunConfig& c, const std::string& k, const std::string& v) { c.field = static_cast<int>(parse_int(k, v)); }, \
      [](const RunConfig& c) { return std::to_string(c.field); }}
#define U64_KEY(field) \
  Key{#field, [](RunConfig& c, const std::string& k, const std::string& v) { c.field = parse_u64(k, v); }, \
      [](const RunConfig& c) { return std::to_string(c.field); }}
#define DBL_KEY(field) \
  Key{#field, [](RunConfig& c, const std::string& k, const std::string& v) { c.field = parse_double(k, v); }, \
      [](const RunConfig& c) { return fmt(c.field); }}
#define BOOL_KEY(field) \
  Key{#field, [](RunConfig& c, const std::string& k, const std::string& v) { c.field = parse_bool(k, v); }, \
      [](const RunConfig& c) { return std::string(c.field ? "true" : "false"); }}
#define ENUM_KEY(field, table) \
  Key{#field, [](RunConfig& c, const std::string& k, const std::string& v) { c.field = table.parse(k, v); }, \
      [](const RunConfig& c) { return table.render(c.field); }}

const std::vector<Key>& keys() {
  static const std::vector<Key> table{
      ENUM_KEY(mode, kModes),
      INT_KEY(snippet_interval),
      INT_KEY(temporal_length),
      INT_KEY(window_stride),
      INT_KEY(max_duration),
      INT_KEY(feature_dim),
      INT_KEY(input_dim),
      INT_KEY(embed_dim),
      INT_KEY(out_dim),
      Key{"scales", [](RunConfig& c, const std::string& k, const std::string& v) { c.scales = parse_ints(k, v); },
          [](const RunConfig& c) { return render_ints(c.scales); }},
      INT_KEY(iterations),
      ENUM_KEY(attention_variant, kVariants),
      ENUM_KEY(fusion, kFusions),
      ENUM_KEY(softmax_axis, kAxes),
      BOOL_KEY(residual),
      INT_KEY(align_bins),
      INT_KEY(head_hidden),
      DBL_KEY(bn_momentum),
      DBL_KEY(lambda_norm),
      DBL_KEY(lambda_com),
      DBL_KEY(label_binarize_thresh),
      DBL_KEY(map_binarize_thresh),
      Key{"lr_schedule",
          [](RunConfig& c, const std::string& k, const std::string& v) { c.lr_schedule = parse_schedule(k, v); },
          [](const RunConfig& c) { return render_schedule(c.lr_schedule); }},
      INT_KEY(epochs),
      INT_KEY(batch_size),
      ENUM_KEY(suppress, kSuppressions),
      DBL_KEY(nms_threshold),
      DBL_KEY(soft_nms_sigma),
      DBL_KEY(soft_nms_keep),
      Key{"soft_nms_hard_threshold",
          [](RunConfig& c, const std::string& k, const std::string& v) {
            if (v == "none") {
              c.soft_nms_hard_threshold.reset();
            } else {
              c.soft_nms_hard_threshold = parse_double(k, v);
            }
          },
          [](const RunConfig& c) {
            return c.soft_nms_hard_threshold ? fmt(*c.soft_nms_hard_threshold) : std::string("none");
          }},
      ENUM_KEY(soft_nms_decay, kDecays),
      DBL_KEY(soft_nms_linear_threshold),
      ENUM_KEY(candidate_rule, kRules),
      INT_KEY(max_proposals),
      ENUM_KEY(eval_mode, kEvalModes),
      Key{"an_values", [](RunConfig& c, const std::string& k, const std::string& v) { c.an_values = parse_ints(k, v); },
          [](const RunConfig& c) { return render_ints(c.an_values); }},
      BOOL_KEY(video_weighted),
      INT_KEY(synth_videos),
      INT_KEY(synth_length),
      INT_KEY(synth_channels),
      INT_KEY(synth_max_instances),
      DBL_KEY(synth_offset),
      DBL_KEY(synth_noise),
      INT_KEY(synth_classes),
      U64_KEY(synth_pattern_seed),
      DBL_KEY(synth_fps),
      U64_KEY(seed),
      INT_KEY(jobs),
      Key{"annotations", [](RunConfig& c, const std::string&, const std::string& v) { c.annotations = v; },
          [](const RunConfig& c) { return c.annotations; }},
  };
  return table;
}

#undef INT_KEY
#undef U64_KEY
#undef DBL_KEY
#undef BOOL_KEY
#undef ENUM_KEY

}  // namespace

RunConfig RunConfig::profile(const std::string& name) {
  RunConfig c;
  if (name == "thumos") return c;
  if (name == "anet") {
    c.mode = SequenceMode::kRescaled;
    c.snippet_interval = 16;
    c.temporal_length = 100;
    c.max_duration = 100;
    c.nms_threshold = 0.45;
    c.lr_schedule = {{1e-3, 7}, {1e-4, 3}};
    c.epochs = 10;
    c.batch_size = 16;
    c.eval_mode = EvalMode::kAnet;
    c.an_values = {1, 10, 50, 100};
    return c;
  }
  throw InvalidArgument("unknown profile '" + name + "' (expected thumos|anet)");
}

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const auto& k : keys()) {
    if (key == k.name) {
      k.set(*this, key, trim(value));
      return;
    }
  }
  throw InvalidArgument("unknown config key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> RunConfig::items() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : keys()) out.emplace_back(k.name, k.get(*this));
  return out;
}

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw InvalidArgument("invalid config: " + what);
  };
  require(snippet_interval >= 1, "snippet_interval >= 1");
  require(temporal_length >= 1, "temporal_length >= 1");
  require(window_stride >= 1, "window_stride >= 1");
  require(mode != SequenceMode::kWindowed || window_stride <= temporal_length, "window_stride <= temporal_length");
  require(max_duration >= 1 && max_duration <= temporal_length, "1 <= max_duration <= temporal_length");
  require(feature_dim >= 1 && input_dim >= 1 && embed_dim >= 1 && out_dim >= 1, "channel sizes >= 1");
  require(iterations >= 1, "iterations >= 1");
  require(align_bins >= 1 && head_hidden >= 1, "align_bins, head_hidden >= 1");
  require(bn_momentum > 0 && bn_momentum <= 1, "0 < bn_momentum <= 1");
  require(lambda_norm >= 0 && lambda_com >= 0, "lambda_norm, lambda_com >= 0");
  require(label_binarize_thresh >= 0 && label_binarize_thresh < 1, "0 <= label_binarize_thresh < 1");
  require(map_binarize_thresh >= 0 && map_binarize_thresh < 1, "0 <= map_binarize_thresh < 1");
  for (const auto& seg : lr_schedule) require(seg.lr >= 0 && seg.epochs >= 0, "lr_schedule entries >= 0");
  require(epochs >= 0 && batch_size >= 1, "epochs >= 0, batch_size >= 1");
  require(nms_threshold >= 0 && nms_threshold <= 1, "0 <= nms_threshold <= 1");
  require(soft_nms_sigma > 0 && soft_nms_keep >= 0, "soft_nms_sigma > 0, soft_nms_keep >= 0");
  require(max_proposals >= 0, "max_proposals >= 0");
  for (int an : an_values) require(an >= 1, "an_values >= 1");
  require(jobs >= 1, "jobs >= 1");
  model_config().slots.validate(temporal_length);
}

ModelConfig RunConfig::model_config() const {
  ModelConfig m;
  m.slots.feature_dim = feature_dim;
  m.slots.input_dim = input_dim;
  m.slots.embed_dim = embed_dim;
  m.slots.out_dim = out_dim;
  m.slots.scales = scales;
  m.slots.iterations = iterations;
  m.slots.variant = attention_variant;
  m.slots.fusion = fusion;
  m.slots.softmax_axis = softmax_axis;
  m.slots.residual = residual;
  m.slots.bn_momentum = bn_momentum;
  m.heads.max_duration = max_duration;
  m.heads.align_bins = align_bins;
  m.heads.hidden = head_hidden;
  return m;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.lambda_norm = lambda_norm;
  t.lambda_com = lambda_com;
  t.label_threshold = label_binarize_thresh;
  t.map_threshold = map_binarize_thresh;
  t.lr_schedule = lr_schedule;
  t.epochs = epochs;
  t.batch_size = batch_size;
  t.seed = seed;
  return t;
}

SequencePlan RunConfig::sequence_plan() const {
  return {mode, snippet_interval, temporal_length, window_stride};
}

SuppressionConfig RunConfig::suppression_config() const {
  SuppressionConfig s;
  s.method = suppress;
  s.nms_threshold = nms_threshold;
  s.soft.sigma = soft_nms_sigma;
  s.soft.keep_threshold = soft_nms_keep;
  s.soft.hard_threshold = soft_nms_hard_threshold;
  s.soft.decay = soft_nms_decay;
  s.soft.linear_threshold = soft_nms_linear_threshold;
  return s;
}

EvalConfig RunConfig::eval_config() const {
  EvalConfig e = eval_mode == EvalMode::kAnet ? EvalConfig::anet() : EvalConfig::thumos();
  e.an_values = an_values;
  e.video_weighted = video_weighted;
  return e;
}

SynthSpec RunConfig::synth_spec() const {
  SynthSpec s;
  s.n_videos = synth_videos;
  s.length = synth_length;
  s.channels = synth_channels;
  s.max_instances = synth_max_instances;
  s.seed = seed;
  s.pattern_seed = synth_pattern_seed;
  s.action_offset = synth_offset;
  s.noise = synth_noise;
  s.n_classes = synth_classes;
  s.snippet_interval = snippet_interval;
  s.fps = synth_fps;
  return s;
}

RunConfig parse_config(const std::string& text, RunConfig base) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool seen_key = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "profile") {
      if (seen_key) throw InvalidArgument("config line " + std::to_string(lineno) + ": 'profile' must come first");
      base = RunConfig::profile(value);
    } else {
      base.set(key, value);
    }
    seen_key = true;
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), std::move(base));
}

std::string render_config(const RunConfig& config) {
  std::string out;
  for (const auto& [k, v] : config.items()) out += k + " = " + v + "\n";
  return out;
}

void save_config(const std::filesystem::path& path, const RunConfig& config) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << render_config(config);
}

}  // namespace slotprop
