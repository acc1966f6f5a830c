#pragma once

#include "alrf/netcore.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace alrf {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam moments mirroring a network's trainable parameters.
struct OptimState {
    AdamConfig config;
    std::vector<Tensor> m_weights, v_weights, m_bias, v_bias;
    std::uint64_t step = 0;

    static OptimState for_network(const Network& net, AdamConfig config = {});

    /// Zeroes the moments of one trainable layer's weights.
    void reset_weight_moments(std::size_t layer);
};

/// One bias-corrected Adam update of `param` in place. `step` is the
/// 1-based step index used for the bias correction.
void adam_update(Tensor& param, const Tensor& grad, Tensor& m, Tensor& v, const AdamConfig& cfg,
                 std::uint64_t step);

/// Adam step over every trainable layer; increments state.step.
void adam_step(Network& net, std::span<const LayerGrad> grads, OptimState& state);

} // namespace alrf
