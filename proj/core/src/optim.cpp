#include "alrf/optim.hpp"

#include "alrf/errors.hpp"

#include <cmath>

namespace alrf {

OptimState OptimState::for_network(const Network& net, AdamConfig config) {
    OptimState s;
    s.config = config;
    for (std::size_t t = 0; t < net.trainable_count(); ++t) {
        s.m_weights.emplace_back(net.weights(t).shape());
        s.v_weights.emplace_back(net.weights(t).shape());
        s.m_bias.emplace_back(net.bias(t).shape());
        s.v_bias.emplace_back(net.bias(t).shape());
    }
    return s;
}

void OptimState::reset_weight_moments(std::size_t layer) {
    m_weights.at(layer).fill(0.0);
    v_weights.at(layer).fill(0.0);
}

void adam_update(Tensor& param, const Tensor& grad, Tensor& m, Tensor& v, const AdamConfig& cfg,
                 std::uint64_t step) {
    require_same_shape(param, grad, "adam gradient");
    require_same_shape(param, m, "adam first moment");
    require_same_shape(param, v, "adam second moment");
    const double c1 = 1.0 - std::pow(cfg.beta1, double(step));
    const double c2 = 1.0 - std::pow(cfg.beta2, double(step));
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = grad[i];
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        const double mhat = m[i] / c1;
        const double vhat = v[i] / c2;
        param[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

void adam_step(Network& net, std::span<const LayerGrad> grads, OptimState& state) {
    if (grads.size() != net.trainable_count() || state.m_weights.size() != net.trainable_count())
        throw ShapeError("adam_step: gradient/state count does not match the network");
    ++state.step;
    for (std::size_t t = 0; t < grads.size(); ++t) {
        adam_update(net.weights(t), grads[t].weights, state.m_weights[t], state.v_weights[t], state.config, state.step);
        adam_update(net.bias(t), grads[t].bias, state.m_bias[t], state.v_bias[t], state.config, state.step);
    }
    net.invalidate_cache();
}

} // namespace alrf
