#pragma once

#include "alrf/netcore.hpp"

#include <span>
#include <string>
#include <vector>

namespace alrf {

/// Per-layer nonlinear condition numbers for one epoch.
struct ConditionReport {
    std::vector<double> kappa;
    std::vector<double> gamma;
    double sncn = 0.0;
    int epoch = 0;
};

inline constexpr double kDegenerateOutputNorm = 1e-12;
inline constexpr std::size_t kFiniteDifferenceMaxParams = 10000;

/// ||J||_F of the stacked post-activation layer output over `batch` with
/// respect to theta = {W, b}, in closed form.
///
/// For an output unit with activation Jacobian D (diagonal for elementwise
/// activations, diag(y) - y y^T for softmax) and input x, each row of J is
/// D times the input (or 1 for the bias), so
///     ||J||_F^2 = sum_samples ||D||_F^2 (||x||^2 + 1)
/// for dense layers and sum over output pixels of D^2 (||patch||^2 + 1) for
/// convolutions.
double jacobian_fro_norm(const LayerSpec& spec, const LayerState& state, const Tensor& batch);

/// Central-difference estimate of the same quantity. Cost is O(P) layer
/// forwards; throws DomainError above kFiniteDifferenceMaxParams.
double jacobian_fro_norm_fd(const LayerSpec& spec, const LayerState& state, const Tensor& batch,
                            double h = 1e-5);

/// ||J||_F * ||theta||_F / ||f||_F on `batch` (the layer's input).
/// Throws DegenerateOutput when ||f||_F < kDegenerateOutputNorm.
double layer_condition_number(const LayerSpec& spec, const LayerState& state, const Tensor& batch);

/// Same ratio with ||J||_F taken from the finite-difference oracle.
double layer_condition_number_fd(const LayerSpec& spec, const LayerState& state, const Tensor& batch,
                                 double h = 1e-5);

/// gamma_l = kappa_l / max(kappa). Throws AllZero if every kappa is zero.
std::vector<double> normalize_condition_numbers(std::span<const double> kappa);

double sncn(std::span<const double> gamma);

/// Condition report over all trainable layers on a probe batch. Layers with
/// degenerate output are assigned the maximum kappa of the others. If every
/// kappa is zero, gamma is all zeros and sncn is 0.
ConditionReport condition_report(const Network& net, const Tensor& probe, int epoch);

/// One JSON object: {"epoch", "kappa", "gamma", "sncn"}.
std::string to_json_line(const ConditionReport& report);

} // namespace alrf
