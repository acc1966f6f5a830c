#pragma once

#include "alrf/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace alrf {

/// Labelled samples: one feature row per sample, integer class labels.
struct Dataset {
    Tensor features; // (samples, features)
    std::vector<std::size_t> labels;
    std::size_t classes = 0;
    std::vector<std::string> feature_names;
    std::vector<std::string> class_names;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t feature_count() const { return features.cols(); }

    Dataset subset(std::span<const std::size_t> rows) const;
    Tensor one_hot(std::span<const std::size_t> rows) const;
    Tensor one_hot() const;
    /// Feature rows reshaped to (rows, sample_shape...).
    Tensor batch(std::span<const std::size_t> rows, const Tensor::Shape& sample_shape) const;
};

struct DataSplits {
    Dataset train;
    Dataset validation;
    Dataset test;
};

/// Shuffled disjoint split. Every fraction must be positive and they must sum to 1.
DataSplits split_dataset(const Dataset& data, double train, double validation, double test, std::uint64_t seed);

/// Loads a header-first CSV. Class labels are mapped to indices in
/// lexicographic order of their text; every other column must be numeric.
/// With `normalize`, each feature is z-scored with sigma floored at 1e-12.
Dataset load_csv(const std::filesystem::path& path, const std::string& label_column, bool normalize);

/// Two-class 2-D data: four Gaussian blobs at the corners of a square, with
/// diagonal corners sharing a class, followed by independent label flips.
inline constexpr double kSurfaceBlobCenter = 1.0;
inline constexpr double kSurfaceBlobSigma = 0.45;

Dataset make_noisy_surface_dataset(std::size_t n, double noise, std::uint64_t seed);

} // namespace alrf
