#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "jscn/eval.hpp"
#include "jscn/model.hpp"
#include "jscn/training.hpp"

namespace jscn {

nlohmann::json hyperparams_to_json(const ModelHyperparams& hp);
ModelHyperparams hyperparams_from_json(const nlohmann::json& j);

nlohmann::json train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const EvalReport& report);

/// Model checkpoint: container with magic JSCNCKP1; the manifest records
/// hyperparams, training config, domain names/sizes and the seed.
struct Checkpoint {
    ModelHyperparams hp;
    TrainConfig cfg;
    std::vector<std::string> domain_names;  // sources..., target
    std::vector<DomainParameters> params;
    nlohmann::json extra;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace jscn
