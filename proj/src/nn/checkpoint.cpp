#include "gwasdl/nn/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "gwasdl/error.hpp"
#include "gwasdl/nn/config_json.hpp"

namespace gwasdl::nn {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'G', 'W', 'D', 'L', 'C', 'K', 'P', 'T'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <typename T>
void write_raw(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in, const std::filesystem::path& path) {
    T value{};
    if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
        throw Error(ErrorCode::IoFailure, "truncated checkpoint " + path.string());
    }
    return value;
}

}  // namespace

void save_checkpoint(const TrainedModel& model, const std::filesystem::path& path) {
    json history = json::array();
    for (const auto& e : model.history) {
        history.push_back({{"train_loss", e.train_loss},
                           {"val_auc", std::isnan(e.val_auc) ? json(nullptr) : json(e.val_auc)}});
    }
    json params = json::array();
    for (const auto& p : model.network.parameters()) {
        params.push_back({{"name", p.name}, {"shape", p.tensor.shape()}});
    }
    const json meta = {{"config", to_json(model.config)}, {"n_snps", model.n_snps}, {"seed", model.seed},
                       {"best_epoch", model.best_epoch},  {"history", history},      {"parameters", params}};
    const std::string text = meta.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoFailure, "cannot write checkpoint " + path.string());
    }
    out.write(kMagic, sizeof kMagic);
    write_raw(out, kCheckpointVersion);
    write_raw(out, static_cast<std::uint64_t>(text.size()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& p : model.network.parameters()) {
        const auto values = p.tensor.values();
        out.write(reinterpret_cast<const char*>(values.data()),
                  static_cast<std::streamsize>(values.size() * sizeof(double)));
    }
    if (!out) {
        throw Error(ErrorCode::IoFailure, "failed writing checkpoint " + path.string());
    }
}

TrainedModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoFailure, "cannot open checkpoint " + path.string());
    }
    char magic[8];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
        throw Error(ErrorCode::IoFailure, path.string() + " is not a gwasdl checkpoint");
    }
    const auto version = read_raw<std::uint32_t>(in, path);
    if (version != kCheckpointVersion) {
        throw Error(ErrorCode::IoFailure, "unsupported checkpoint version " + std::to_string(version));
    }
    const auto length = read_raw<std::uint64_t>(in, path);
    std::string text(length, '\0');
    if (!in.read(text.data(), static_cast<std::streamsize>(length))) {
        throw Error(ErrorCode::IoFailure, "truncated checkpoint metadata in " + path.string());
    }
    TrainedModel model;
    try {
        const json meta = json::parse(text);
        model.config = model_config_from_json(meta.at("config"));
        model.n_snps = meta.at("n_snps").get<std::size_t>();
        model.seed = meta.at("seed").get<std::uint64_t>();
        model.best_epoch = meta.at("best_epoch").get<std::size_t>();
        for (const auto& e : meta.at("history")) {
            const auto& auc = e.at("val_auc");
            model.history.push_back({e.at("train_loss").get<double>(),
                                     auc.is_null() ? std::numeric_limits<double>::quiet_NaN() : auc.get<double>()});
        }
        model.network = Network(model.config, model.n_snps, model.seed);
        const auto& listed = meta.at("parameters");
        auto& params = model.network.parameters();
        if (listed.size() != params.size()) {
            throw Error(ErrorCode::IoFailure, "checkpoint parameter list does not match its config");
        }
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (listed[i].at("name").get<std::string>() != params[i].name ||
                listed[i].at("shape").get<Shape>() != params[i].tensor.shape()) {
                throw Error(ErrorCode::IoFailure, "checkpoint parameter '" + params[i].name + "' does not match");
            }
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::IoFailure, "bad checkpoint metadata: " + std::string(e.what()));
    }
    for (auto& p : model.network.parameters()) {
        auto values = p.tensor.mutable_values();
        if (!in.read(reinterpret_cast<char*>(values.data()),
                     static_cast<std::streamsize>(values.size() * sizeof(double)))) {
            throw Error(ErrorCode::IoFailure, "truncated parameter data in " + path.string());
        }
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw Error(ErrorCode::IoFailure, "trailing bytes in checkpoint " + path.string());
    }
    return model;
}

}  // namespace gwasdl::nn
