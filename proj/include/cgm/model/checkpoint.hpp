/* Copyright 2026 The CGM Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef CGM_MODEL_CHECKPOINT_HPP_
#define CGM_MODEL_CHECKPOINT_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "cgm/model/cgm_model.hpp"
#include "cgm/model/inputs.hpp"
#include "cgm/numerics/parameters.hpp"
#include "json.hpp"

namespace cgm {

// Layout: magic line, u64 header length, JSON header, u64 tensor count, then
// per tensor u64 name length, name bytes, u64 rows, u64 cols and row-major
// little-endian doubles.
inline constexpr std::string_view kCheckpointMagic = "CGMCKPT1\n";

struct Checkpoint {
  std::string model = "cgm";  // "cgm" or "lstm"
  ModelConfig config;
  Ablation ablation;
  std::vector<std::string> stocks;
  std::size_t window_days = 20;
  double movement_threshold = 0.5;
  Vocabulary vocab;
  FeatureScaler scaler;
  TargetScaling target;
  std::size_t epoch = 0;  // epoch the parameters were selected at
  RelationGraph graph;     // stored as graph TSV text
  nlohmann::json data = nlohmann::json::object();  // split and preparation settings
  ParameterStore params;
};

nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Ablation& ablation);
Ablation ablation_from_json(const nlohmann::json& j);

void write_checkpoint(std::ostream& out, const Checkpoint& ck);
// Throws ParseError for a bad magic string or a truncated body.
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Throws CompatibilityError listing every hyperparameter that differs, e.g.
// "hidden: checkpoint 300, requested 64".
void check_compatible(const Checkpoint& ck, const ModelConfig& requested,
                      const std::vector<std::string>& stocks);

}  // namespace cgm

#endif  // CGM_MODEL_CHECKPOINT_HPP_
