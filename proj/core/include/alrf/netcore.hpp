#pragma once

#include "alrf/random.hpp"
#include "alrf/tensor.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace alrf {

enum class LayerKind { dense, conv2d, activation, flatten };
enum class Activation { none, relu, tanh, sigmoid, softmax };
enum class LossKind { mse, cross_entropy };

std::string to_string(LayerKind k);
std::string to_string(Activation a);
std::string to_string(LossKind k);
LayerKind parse_layer_kind(const std::string& s);
Activation parse_activation(const std::string& s);
LossKind parse_loss_kind(const std::string& s);

/// Topology of one layer. Dense and conv2d layers are trainable and carry a
/// fused activation applied to their pre-activation output.
struct LayerSpec {
    LayerKind kind = LayerKind::dense;
    std::size_t fan_in = 0;
    std::size_t fan_out = 0;
    std::size_t kh = 0, kw = 0, cin = 0, cout = 0, stride = 1;
    Activation activation = Activation::none;

    static LayerSpec dense(std::size_t fan_in, std::size_t fan_out, Activation act = Activation::none);
    static LayerSpec conv2d(std::size_t kh, std::size_t kw, std::size_t cin, std::size_t cout,
                            std::size_t stride = 1, Activation act = Activation::none);
    static LayerSpec activation_layer(Activation act);
    static LayerSpec flatten();

    bool trainable() const noexcept { return kind == LayerKind::dense || kind == LayerKind::conv2d; }

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Parameters and training-mode caches of one layer.
/// Dense weights are (fan_in, fan_out); conv kernels are (kh, kw, cin, cout).
struct LayerState {
    Tensor weights;
    Tensor bias;

    Tensor input;          // after the dropout mask, if any
    Tensor dropout_mask;   // empty when no dropout was applied
    Tensor pre_activation;
    Tensor output;
};

struct LayerGrad {
    Tensor weights;
    Tensor bias;
};

/// Anchor for the LRF-based penalty gamma * sum ||theta - anchor||_F^2,
/// one entry per trainable layer.
struct PenaltyConfig {
    double gamma = 1.0;
    std::vector<Tensor> anchor_weights;
    std::vector<Tensor> anchor_biases;
};

// Elementwise derivative of an activation given pre-activation z and output y.
// relu'(0) is 0. Not defined for softmax.
double activation_derivative(Activation act, double z, double y);

Tensor activate(Activation act, const Tensor& z);

/// Gradient w.r.t. pre-activation z given the gradient w.r.t. the output y.
Tensor activation_backward(Activation act, const Tensor& z, const Tensor& y, const Tensor& grad_y);

/// Pre-activation of a trainable layer on a batch (no dropout).
Tensor linear_forward(const LayerSpec& spec, const LayerState& state, const Tensor& x);

/// Full layer map on a batch in eval mode, fused activation included.
Tensor layer_forward(const LayerSpec& spec, const LayerState& state, const Tensor& x);

double loss(const Tensor& pred, const Tensor& target, LossKind kind);
Tensor loss_gradient(const Tensor& pred, const Tensor& target, LossKind kind);

inline constexpr double kProbabilityFloor = 1e-12;

class Network {
public:
    Network(Tensor::Shape input_shape, LossKind loss);

    /// Appends a layer; throws ShapeError if it does not compose with the
    /// current output shape. Parameters start at zero.
    Network& add(const LayerSpec& spec);

    /// He-style uniform initialization scaled by fan-in; biases zero.
    void initialize(std::uint64_t seed);

    const Tensor::Shape& input_shape() const noexcept { return shapes_.front(); }
    const Tensor::Shape& output_shape() const noexcept { return shapes_.back(); }
    const Tensor::Shape& layer_input_shape(std::size_t i) const { return shapes_.at(i); }
    LossKind loss_kind() const noexcept { return loss_; }

    std::size_t layer_count() const noexcept { return specs_.size(); }
    const LayerSpec& spec(std::size_t i) const { return specs_.at(i); }
    const LayerState& state(std::size_t i) const { return states_.at(i); }
    LayerState& state(std::size_t i) { return states_.at(i); }

    /// Indices into the layer list of the trainable (dense/conv2d) layers.
    const std::vector<std::size_t>& trainable_layers() const noexcept { return trainable_; }
    std::size_t trainable_count() const noexcept { return trainable_.size(); }
    const LayerSpec& trainable_spec(std::size_t t) const { return specs_.at(trainable_.at(t)); }
    const LayerState& trainable_state(std::size_t t) const { return states_.at(trainable_.at(t)); }
    Tensor& weights(std::size_t t) { return states_.at(trainable_.at(t)).weights; }
    const Tensor& weights(std::size_t t) const { return states_.at(trainable_.at(t)).weights; }
    Tensor& bias(std::size_t t) { return states_.at(trainable_.at(t)).bias; }
    const Tensor& bias(std::size_t t) const { return states_.at(trainable_.at(t)).bias; }

    std::size_t parameter_count() const noexcept;

    /// Eval-mode forward; does not touch caches.
    Tensor forward(const Tensor& x) const;

    /// Eval-mode inputs seen by each trainable layer.
    std::vector<Tensor> trainable_inputs(const Tensor& x) const;

    /// Training-mode forward. `dropout` holds one probability per trainable
    /// layer (or is empty): each unit feeding that layer is zeroed with
    /// probability p and survivors scaled by 1/(1-p). Caches activations.
    Tensor forward_train(const Tensor& x, std::span<const double> dropout, Rng& rng);

    /// Exact gradients of loss(+penalty) w.r.t. every trainable parameter, one
    /// entry per trainable layer. weight_decay adds lambda * W to weight
    /// gradients. Throws StaleCache without a preceding forward_train.
    std::vector<LayerGrad> backward(const Tensor& target, const PenaltyConfig* penalty = nullptr,
                                    double weight_decay = 0.0);

    void invalidate_cache() noexcept { cache_valid_ = false; }

private:
    Tensor::Shape batch_shape(const Tensor::Shape& sample, std::size_t batch) const;
    void check_input(const Tensor& x) const;

    std::vector<LayerSpec> specs_;
    std::vector<LayerState> states_;
    std::vector<Tensor::Shape> shapes_; // shapes_[i] = per-sample input of layer i; back() = output
    std::vector<std::size_t> trainable_;
    LossKind loss_;
    bool cache_valid_ = false;
};

/// base_loss + gamma * sum over trainable layers of ||W - W_a||^2 + ||b - b_a||^2.
double lrf_penalty_loss(const Network& net, double base_loss, const PenaltyConfig& cfg);

/// Anchor built from a parameter snapshot: weights rank-1 simplified, biases copied.
PenaltyConfig make_lrf_anchor(const Network& snapshot, double gamma);

} // namespace alrf
