#pragma once

#include <filesystem>

#include "gwasdl/nn/model.hpp"

namespace gwasdl::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary container: "GWDLCKPT", u32 version, u64 metadata length, UTF-8 JSON
/// metadata (config, seed, history, parameter names and shapes), then every
/// parameter as little-endian IEEE doubles in parameter order.
void save_checkpoint(const TrainedModel& model, const std::filesystem::path& path);

/// Throws IoFailure on a malformed or unreadable file.
TrainedModel load_checkpoint(const std::filesystem::path& path);

}  // namespace gwasdl::nn
