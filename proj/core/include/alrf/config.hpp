#pragma once

#include "alrf/controller.hpp"
#include "alrf/dataset.hpp"
#include "alrf/netcore.hpp"
#include "alrf/trainer.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace alrf {

inline constexpr int kConfigSchemaVersion = 1;

enum class RegularizerKind { none, dropout, weight_decay, adaptive_lrf, lrf_penalty };

std::string to_string(RegularizerKind k);

struct Regularizer {
    RegularizerKind kind = RegularizerKind::none;
    double dropout = 0.0;
    double weight_decay = 0.0;
    double gamma = 1.0;
    ControllerConfig adaptive{};
    std::string label;
    /// Extra regularizers stacked on this one; only honoured when the config
    /// sets allow_combinations.
    std::vector<Regularizer> with;
};

struct DatasetConfig {
    enum class Source { synthetic, csv } source = Source::synthetic;
    std::size_t samples = 600;
    double noise = 0.3;
    std::uint64_t seed = 0;
    std::filesystem::path path;
    std::string label_column = "label";
    bool normalize = true;
};

struct NetworkConfig {
    // MLP form: input -> hidden dense layers -> dense(classes, output_activation).
    std::vector<std::size_t> hidden{32, 32};
    Activation activation = Activation::relu;
    Activation output_activation = Activation::softmax;
    LossKind loss = LossKind::cross_entropy;
    // Explicit form (when layers is non-empty): input_shape plus layer list.
    Tensor::Shape input_shape;
    std::vector<LayerSpec> layers;
};

struct RunConfig {
    int schema_version = kConfigSchemaVersion;
    DatasetConfig dataset;
    double split_train = 0.6, split_validation = 0.2, split_test = 0.2;
    NetworkConfig network;
    TrainConfig training; // regularizer and seed fields are filled per run
    std::vector<std::uint64_t> seeds{0};
    std::vector<Regularizer> regularizers;
    bool allow_combinations = false;
};

/// Parses a JSON run configuration. Relative dataset paths resolve against
/// `base_dir`. Throws ConfigError naming the offending field.
RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

Network build_network(const NetworkConfig& cfg, std::size_t input_features, std::size_t classes);

/// Training configuration for one (regularizer, seed) run.
TrainConfig train_config_for(const RunConfig& cfg, const Regularizer& reg, std::uint64_t seed);

} // namespace alrf
