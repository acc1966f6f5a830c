#pragma once

#include "alrf/netcore.hpp"

#include <filesystem>
#include <string>

namespace alrf {

// Checkpoint format (JSON, "format": "alrf-checkpoint", "version": 1):
//   input_shape: [..], loss: "mse" | "cross_entropy",
//   layers: [{ index, kind, activation, dims..., weights?: {shape, data}, bias?: {shape, data} }]
// Values are row-major float64 written with round-trip precision.
inline constexpr int kCheckpointVersion = 1;

std::string checkpoint_to_string(const Network& net);
Network checkpoint_from_string(const std::string& text);

void save_checkpoint(const Network& net, const std::filesystem::path& path);
Network load_checkpoint(const std::filesystem::path& path);

} // namespace alrf
