#include "jscn/serialize.hpp"

#include "jscn/errors.hpp"
#include "jscn/tensor_io.hpp"

namespace jscn {

nlohmann::json hyperparams_to_json(const ModelHyperparams& hp) {
    return {{"input_dim", hp.input_dim},
            {"filter_dim", hp.filter_dim},
            {"num_layers", hp.num_layers},
            {"mapping_kind", to_string(hp.mapping_kind)},
            {"mlp_hidden", hp.mlp_hidden},
            {"concat_mode", to_string(hp.concat_mode)}};
}

ModelHyperparams hyperparams_from_json(const nlohmann::json& j) {
    ModelHyperparams hp;
    hp.input_dim = j.value("input_dim", hp.input_dim);
    hp.filter_dim = j.value("filter_dim", hp.filter_dim);
    hp.num_layers = j.value("num_layers", hp.num_layers);
    if (j.contains("mapping_kind"))
        hp.mapping_kind = mapping_kind_from_string(j["mapping_kind"].get<std::string>());
    hp.mlp_hidden = j.value("mlp_hidden", hp.mlp_hidden);
    if (j.contains("concat_mode"))
        hp.concat_mode = concat_mode_from_string(j["concat_mode"].get<std::string>());
    hp.validate();
    return hp;
}

nlohmann::json train_config_to_json(const TrainConfig& cfg) {
    return {{"learning_rate", cfg.learning_rate},
            {"reg_epsilon", cfg.reg_epsilon},
            {"mu", cfg.cross_weight},
            {"epochs", cfg.epochs},
            {"batch_size", cfg.batch_size},
            {"rmsprop_decay", cfg.rmsprop_decay},
            {"rmsprop_eps", cfg.rmsprop_eps},
            {"seed", cfg.seed},
            {"squared_cross", cfg.squared_cross},
            {"reg_include_items", cfg.reg_include_items},
            {"identity_frozen_mapping", cfg.identity_frozen_mapping},
            {"freeze_x0", cfg.freeze_x0}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
    TrainConfig cfg;
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.reg_epsilon = j.value("reg_epsilon", cfg.reg_epsilon);
    cfg.cross_weight = j.value("mu", cfg.cross_weight);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.rmsprop_decay = j.value("rmsprop_decay", cfg.rmsprop_decay);
    cfg.rmsprop_eps = j.value("rmsprop_eps", cfg.rmsprop_eps);
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    cfg.squared_cross = j.value("squared_cross", cfg.squared_cross);
    cfg.reg_include_items = j.value("reg_include_items", cfg.reg_include_items);
    cfg.identity_frozen_mapping = j.value("identity_frozen_mapping", cfg.identity_frozen_mapping);
    cfg.freeze_x0 = j.value("freeze_x0", cfg.freeze_x0);
    cfg.validate();
    return cfg;
}

nlohmann::json report_to_json(const EvalReport& report) {
    nlohmann::json j;
    j["ks"] = report.ks;
    j["n_users_evaluated"] = report.n_users_evaluated;
    nlohmann::json recall, map;
    for (int k : report.ks) {
        recall[std::to_string(k)] = report.recall_at.at(k);
        map[std::to_string(k)] = report.map_at.at(k);
    }
    j["recall_at"] = recall;
    j["map_at"] = map;
    return j;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    if (ckpt.domain_names.size() != ckpt.params.size())
        throw InputError("checkpoint needs one name per parameter set");

    nlohmann::json manifest;
    manifest["kind"] = "jscn-checkpoint";
    manifest["hyperparams"] = hyperparams_to_json(ckpt.hp);
    manifest["config"] = train_config_to_json(ckpt.cfg);
    manifest["seed"] = ckpt.cfg.seed;
    if (!ckpt.extra.is_null()) manifest["extra"] = ckpt.extra;
    manifest["domains"] = nlohmann::json::array();
    for (std::size_t d = 0; d < ckpt.params.size(); ++d)
        manifest["domains"].push_back({{"name", ckpt.domain_names[d]},
                                       {"n_users", ckpt.params[d].n_users},
                                       {"n_items", ckpt.params[d].n_items}});

    std::vector<std::pair<std::string, Eigen::MatrixXd>> tensors;
    for (std::size_t d = 0; d < ckpt.params.size(); ++d)
        for (const auto& [name, m] : tensor_refs(ckpt.params[d], ckpt.hp))
            tensors.emplace_back(ckpt.domain_names[d] + "/" + name, *m);

    write_container(path, kCheckpointMagic, manifest, tensors);
}

Checkpoint load_checkpoint(const std::string& path) {
    const TensorContainer c = read_container(path, kCheckpointMagic);
    Checkpoint ckpt;
    try {
        ckpt.hp = hyperparams_from_json(c.manifest.at("hyperparams"));
        ckpt.cfg = train_config_from_json(c.manifest.at("config"));
        if (c.manifest.contains("extra")) ckpt.extra = c.manifest["extra"];
        for (const auto& d : c.manifest.at("domains")) {
            ckpt.domain_names.push_back(d.at("name").get<std::string>());
            DomainParameters p;
            p.n_users = d.at("n_users").get<int>();
            p.n_items = d.at("n_items").get<int>();
            ckpt.params.push_back(std::move(p));
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError("bad checkpoint manifest in '" + path + "': " + e.what());
    }

    for (std::size_t d = 0; d < ckpt.params.size(); ++d) {
        DomainParameters& p = ckpt.params[d];
        const std::string prefix = ckpt.domain_names[d] + "/";
        p.x0 = c.tensor(prefix + "x0");
        for (int k = 0; k < ckpt.hp.num_layers; ++k)
            p.theta.push_back(c.tensor(prefix + "theta_" + std::to_string(k)));
        if (ckpt.hp.mapping_kind == MappingKind::linear) {
            p.w_b = c.tensor(prefix + "w_b");
        } else {
            p.w1 = c.tensor(prefix + "w1");
            p.b1 = c.tensor(prefix + "b1");
            p.w2 = c.tensor(prefix + "w2");
            p.b2 = c.tensor(prefix + "b2");
        }
        if (p.x0.rows() != p.n_users + p.n_items)
            throw InputError("checkpoint tensor shapes disagree with domain sizes");
    }
    return ckpt;
}

}  // namespace jscn
