#include "gwasdl/nn/config_json.hpp"

#include <set>

#include "gwasdl/error.hpp"

namespace gwasdl::nn {

using nlohmann::json;

namespace {

void reject_unknown(const json& doc, const std::set<std::string>& known, const std::string& where) {
    if (!doc.is_object()) {
        throw Error(ErrorCode::ConfigInvalid, where + " must be a JSON object");
    }
    for (const auto& [key, value] : doc.items()) {
        if (!known.contains(key)) {
            throw Error(ErrorCode::ConfigInvalid, "unknown key '" + key + "' in " + where);
        }
    }
}

template <typename T>
void read(const json& doc, const char* key, T& out) {
    if (const auto it = doc.find(key); it != doc.end()) {
        try {
            out = it->get<T>();
        } catch (const json::exception& e) {
            throw Error(ErrorCode::ConfigInvalid, std::string("bad value for '") + key + "': " + e.what());
        }
    }
}

}  // namespace

json to_json(const ModelConfig& config) {
    json spans = json::array();
    for (const auto& s : config.chromosome_boundaries) {
        spans.push_back({{"chromosome", s.chromosome}, {"begin", s.begin}, {"end", s.end}});
    }
    return {{"kind", to_string(config.kind)},
            {"input_channels", config.input_channels},
            {"conv_channels", config.conv_channels},
            {"kernel_size", config.kernel_size},
            {"stride", config.stride},
            {"adaptive_pool_len", config.adaptive_pool_len},
            {"dense_widths", config.dense_widths},
            {"dropout_p", config.dropout_p},
            {"n_labels", config.n_labels},
            {"chromosome_boundaries", spans},
            {"use_covariates", config.use_covariates},
            {"n_covariates", config.n_covariates},
            {"label_names", config.label_names}};
}

ModelConfig model_config_from_json(const json& doc, ModelConfig config) {
    reject_unknown(doc,
                   {"kind", "input_channels", "conv_channels", "kernel_size", "stride", "adaptive_pool_len",
                    "dense_widths", "dropout_p", "n_labels", "chromosome_boundaries", "use_covariates", "n_covariates",
                    "label_names"},
                   "model config");
    if (const auto it = doc.find("kind"); it != doc.end()) {
        config.kind = parse_model_kind(it->get<std::string>());
    }
    read(doc, "input_channels", config.input_channels);
    read(doc, "conv_channels", config.conv_channels);
    read(doc, "kernel_size", config.kernel_size);
    read(doc, "stride", config.stride);
    read(doc, "adaptive_pool_len", config.adaptive_pool_len);
    read(doc, "dense_widths", config.dense_widths);
    read(doc, "dropout_p", config.dropout_p);
    read(doc, "n_labels", config.n_labels);
    read(doc, "use_covariates", config.use_covariates);
    read(doc, "n_covariates", config.n_covariates);
    read(doc, "label_names", config.label_names);
    if (const auto it = doc.find("chromosome_boundaries"); it != doc.end()) {
        config.chromosome_boundaries.clear();
        for (const auto& s : *it) {
            config.chromosome_boundaries.push_back(
                {s.at("chromosome").get<int>(), s.at("begin").get<std::size_t>(), s.at("end").get<std::size_t>()});
        }
    }
    return config;
}

json to_json(const TrainConfig& config) {
    return {{"learning_rate", config.learning_rate},
            {"batch_size", config.batch_size},
            {"epochs", config.epochs},
            {"weight_decay", config.weight_decay},
            {"seed", config.seed},
            {"early_stop_patience", config.early_stop_patience},
            {"optimizer", to_string(config.optimizer)},
            {"momentum", config.momentum},
            {"adam_beta1", config.adam_beta1},
            {"adam_beta2", config.adam_beta2},
            {"adam_epsilon", config.adam_epsilon}};
}

TrainConfig train_config_from_json(const json& doc, TrainConfig config) {
    reject_unknown(doc,
                   {"learning_rate", "batch_size", "epochs", "weight_decay", "seed", "early_stop_patience", "optimizer",
                    "momentum", "adam_beta1", "adam_beta2", "adam_epsilon"},
                   "train config");
    read(doc, "learning_rate", config.learning_rate);
    read(doc, "batch_size", config.batch_size);
    read(doc, "epochs", config.epochs);
    read(doc, "weight_decay", config.weight_decay);
    read(doc, "seed", config.seed);
    read(doc, "early_stop_patience", config.early_stop_patience);
    read(doc, "momentum", config.momentum);
    read(doc, "adam_beta1", config.adam_beta1);
    read(doc, "adam_beta2", config.adam_beta2);
    read(doc, "adam_epsilon", config.adam_epsilon);
    if (const auto it = doc.find("optimizer"); it != doc.end()) {
        config.optimizer = parse_optimizer(it->get<std::string>());
    }
    return config;
}

}  // namespace gwasdl::nn
