#pragma once

#include <json.hpp>

#include "gwasdl/nn/model.hpp"
#include "gwasdl/nn/train.hpp"

namespace gwasdl::nn {

nlohmann::json to_json(const ModelConfig& config);
/// Missing keys keep their defaults; unknown keys throw ConfigInvalid.
ModelConfig model_config_from_json(const nlohmann::json& doc, ModelConfig base = {});

nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& doc, TrainConfig base = {});

}  // namespace gwasdl::nn
