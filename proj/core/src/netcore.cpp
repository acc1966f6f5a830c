#include "alrf/netcore.hpp"

#include "alrf/errors.hpp"
#include "alrf/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace alrf {

std::string to_string(LayerKind k) {
    switch (k) {
    case LayerKind::dense: return "dense";
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::activation: return "activation";
    case LayerKind::flatten: return "flatten";
    }
    return "?";
}

std::string to_string(Activation a) {
    switch (a) {
    case Activation::none: return "none";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    case Activation::softmax: return "softmax";
    }
    return "?";
}

std::string to_string(LossKind k) { return k == LossKind::mse ? "mse" : "cross_entropy"; }

LayerKind parse_layer_kind(const std::string& s) {
    for (auto k : {LayerKind::dense, LayerKind::conv2d, LayerKind::activation, LayerKind::flatten})
        if (to_string(k) == s) return k;
    throw DomainError("unknown layer kind '" + s + "'");
}

Activation parse_activation(const std::string& s) {
    for (auto a : {Activation::none, Activation::relu, Activation::tanh, Activation::sigmoid, Activation::softmax})
        if (to_string(a) == s) return a;
    throw DomainError("unknown activation '" + s + "'");
}

LossKind parse_loss_kind(const std::string& s) {
    if (s == "mse") return LossKind::mse;
    if (s == "cross_entropy") return LossKind::cross_entropy;
    throw DomainError("unknown loss '" + s + "'");
}

LayerSpec LayerSpec::dense(std::size_t fan_in, std::size_t fan_out, Activation act) {
    LayerSpec s;
    s.kind = LayerKind::dense;
    s.fan_in = fan_in;
    s.fan_out = fan_out;
    s.activation = act;
    return s;
}

LayerSpec LayerSpec::conv2d(std::size_t kh, std::size_t kw, std::size_t cin, std::size_t cout,
                            std::size_t stride, Activation act) {
    LayerSpec s;
    s.kind = LayerKind::conv2d;
    s.kh = kh;
    s.kw = kw;
    s.cin = cin;
    s.cout = cout;
    s.stride = stride;
    s.activation = act;
    return s;
}

LayerSpec LayerSpec::activation_layer(Activation act) {
    LayerSpec s;
    s.kind = LayerKind::activation;
    s.activation = act;
    return s;
}

LayerSpec LayerSpec::flatten() {
    LayerSpec s;
    s.kind = LayerKind::flatten;
    return s;
}

// ---------------------------------------------------------------------------
// Activations
// ---------------------------------------------------------------------------

double activation_derivative(Activation act, double z, double y) {
    switch (act) {
    case Activation::none: return 1.0;
    case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::tanh: return 1.0 - y * y;
    case Activation::sigmoid: return y * (1.0 - y);
    case Activation::softmax: break;
    }
    throw DomainError("softmax has no elementwise derivative");
}

Tensor activate(Activation act, const Tensor& z) {
    Tensor y = z;
    auto v = y.values();
    switch (act) {
    case Activation::none: break;
    case Activation::relu:
        for (auto& x : v) x = x > 0.0 ? x : 0.0;
        break;
    case Activation::tanh:
        for (auto& x : v) x = std::tanh(x);
        break;
    case Activation::sigmoid:
        for (auto& x : v) x = 1.0 / (1.0 + std::exp(-x));
        break;
    case Activation::softmax: {
        if (z.rank() != 2) throw ShapeError("softmax expects a (batch, classes) tensor");
        const std::size_t n = z.rows(), m = z.cols();
        for (std::size_t i = 0; i < n; ++i) {
            double mx = y(i, 0);
            for (std::size_t j = 1; j < m; ++j) mx = std::max(mx, y(i, j));
            double sum = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                y(i, j) = std::exp(y(i, j) - mx);
                sum += y(i, j);
            }
            for (std::size_t j = 0; j < m; ++j) y(i, j) /= sum;
        }
        break;
    }
    }
    return y;
}

Tensor activation_backward(Activation act, const Tensor& z, const Tensor& y, const Tensor& grad_y) {
    require_same_shape(y, grad_y, "activation_backward");
    Tensor g = grad_y;
    if (act == Activation::none) return g;
    if (act == Activation::softmax) {
        const std::size_t n = y.rows(), m = y.cols();
        for (std::size_t i = 0; i < n; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < m; ++j) dot += grad_y(i, j) * y(i, j);
            for (std::size_t j = 0; j < m; ++j) g(i, j) = y(i, j) * (grad_y(i, j) - dot);
        }
        return g;
    }
    for (std::size_t i = 0; i < g.size(); ++i) g[i] *= activation_derivative(act, z[i], y[i]);
    return g;
}

// ---------------------------------------------------------------------------
// Layer kernels
// ---------------------------------------------------------------------------

namespace {

std::size_t conv_out_extent(std::size_t in, std::size_t k, std::size_t stride) { return (in - k) / stride + 1; }

Tensor dense_forward(const LayerState& s, const Tensor& x) {
    Tensor z = matmul(x, s.weights);
    const std::size_t n = z.rows(), m = z.cols();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) z(i, j) += s.bias[j];
    return z;
}

Tensor conv_forward(const LayerSpec& spec, const LayerState& s, const Tensor& x) {
    const auto& xs = x.shape();
    const std::size_t batch = xs[0], h = xs[1], w = xs[2], cin = xs[3];
    const std::size_t ho = conv_out_extent(h, spec.kh, spec.stride);
    const std::size_t wo = conv_out_extent(w, spec.kw, spec.stride);
    const std::size_t cout = spec.cout;
    Tensor z({batch, ho, wo, cout});
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t oy = 0; oy < ho; ++oy)
            for (std::size_t ox = 0; ox < wo; ++ox) {
                double* out = &z[((b * ho + oy) * wo + ox) * cout];
                for (std::size_t co = 0; co < cout; ++co) out[co] = s.bias[co];
                for (std::size_t ky = 0; ky < spec.kh; ++ky)
                    for (std::size_t kx = 0; kx < spec.kw; ++kx) {
                        const std::size_t iy = oy * spec.stride + ky, ix = ox * spec.stride + kx;
                        const double* in = x.values().data() + ((b * h + iy) * w + ix) * cin;
                        const double* k = s.weights.values().data() + (ky * spec.kw + kx) * cin * cout;
                        for (std::size_t ci = 0; ci < cin; ++ci) {
                            const double xv = in[ci];
                            for (std::size_t co = 0; co < cout; ++co) out[co] += xv * k[ci * cout + co];
                        }
                    }
            }
    return z;
}

// Returns grad w.r.t. x; accumulates dW, db.
Tensor conv_backward(const LayerSpec& spec, const LayerState& s, const Tensor& x, const Tensor& gz,
                     LayerGrad& grad) {
    const auto& xs = x.shape();
    const std::size_t batch = xs[0], h = xs[1], w = xs[2], cin = xs[3];
    const std::size_t ho = gz.dim(1), wo = gz.dim(2), cout = spec.cout;
    Tensor gx(x.shape());
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t oy = 0; oy < ho; ++oy)
            for (std::size_t ox = 0; ox < wo; ++ox) {
                const double* g = gz.values().data() + ((b * ho + oy) * wo + ox) * cout;
                for (std::size_t co = 0; co < cout; ++co) grad.bias[co] += g[co];
                for (std::size_t ky = 0; ky < spec.kh; ++ky)
                    for (std::size_t kx = 0; kx < spec.kw; ++kx) {
                        const std::size_t iy = oy * spec.stride + ky, ix = ox * spec.stride + kx;
                        const std::size_t in_off = ((b * h + iy) * w + ix) * cin;
                        const std::size_t k_off = (ky * spec.kw + kx) * cin * cout;
                        for (std::size_t ci = 0; ci < cin; ++ci) {
                            const double xv = x[in_off + ci];
                            double acc = 0.0;
                            for (std::size_t co = 0; co < cout; ++co) {
                                grad.weights[k_off + ci * cout + co] += xv * g[co];
                                acc += s.weights[k_off + ci * cout + co] * g[co];
                            }
                            gx[in_off + ci] += acc;
                        }
                    }
            }
    return gx;
}

} // namespace

Tensor linear_forward(const LayerSpec& spec, const LayerState& state, const Tensor& x) {
    if (spec.kind == LayerKind::dense) return dense_forward(state, x);
    if (spec.kind == LayerKind::conv2d) return conv_forward(spec, state, x);
    throw ShapeError("linear_forward: layer is not trainable");
}

Tensor layer_forward(const LayerSpec& spec, const LayerState& state, const Tensor& x) {
    switch (spec.kind) {
    case LayerKind::dense:
    case LayerKind::conv2d: return activate(spec.activation, linear_forward(spec, state, x));
    case LayerKind::activation: return activate(spec.activation, x);
    case LayerKind::flatten: return x.reshaped({x.dim(0), x.size() / x.dim(0)});
    }
    return x;
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

namespace {

void check_probabilities(const Tensor& pred) {
    for (double p : pred.values()) {
        if (!std::isfinite(p) || p < 0.0 || p > 1.0 + 1e-9) {
            throw DomainError("cross_entropy: prediction is not a probability (" + std::to_string(p) + ")");
        }
    }
}

} // namespace

double loss(const Tensor& pred, const Tensor& target, LossKind kind) {
    require_same_shape(pred, target, "loss");
    const double batch = static_cast<double>(pred.dim(0));
    double total = 0.0;
    if (kind == LossKind::mse) {
        for (std::size_t i = 0; i < pred.size(); ++i) {
            const double d = pred[i] - target[i];
            total += d * d;
        }
    } else {
        check_probabilities(pred);
        for (std::size_t i = 0; i < pred.size(); ++i) {
            if (target[i] != 0.0) total -= target[i] * std::log(std::max(pred[i], kProbabilityFloor));
        }
    }
    return total / batch;
}

Tensor loss_gradient(const Tensor& pred, const Tensor& target, LossKind kind) {
    require_same_shape(pred, target, "loss_gradient");
    const double batch = static_cast<double>(pred.dim(0));
    Tensor g(pred.shape());
    if (kind == LossKind::mse) {
        for (std::size_t i = 0; i < pred.size(); ++i) g[i] = 2.0 * (pred[i] - target[i]) / batch;
    } else {
        check_probabilities(pred);
        for (std::size_t i = 0; i < pred.size(); ++i) {
            if (target[i] != 0.0 && pred[i] > kProbabilityFloor) g[i] = -target[i] / (pred[i] * batch);
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Network
// ---------------------------------------------------------------------------

Network::Network(Tensor::Shape input_shape, LossKind loss) : loss_(loss) {
    if (input_shape.empty() || input_shape.size() > 3)
        throw ShapeError("network input must be a vector or an (H,W,C) image");
    for (auto d : input_shape)
        if (d == 0) throw ShapeError("network input dimensions must be positive");
    shapes_.push_back(std::move(input_shape));
}

Network& Network::add(const LayerSpec& spec) {
    const Tensor::Shape& in = shapes_.back();
    Tensor::Shape out;
    LayerState state;
    switch (spec.kind) {
    case LayerKind::dense:
        if (spec.fan_in == 0 || spec.fan_out == 0) throw ShapeError("dense: dims must be positive");
        if (in.size() != 1 || in[0] != spec.fan_in)
            throw ShapeError("dense: expects input (" + std::to_string(spec.fan_in) + "), got " + shape_string(in));
        out = {spec.fan_out};
        state.weights = Tensor({spec.fan_in, spec.fan_out});
        state.bias = Tensor({spec.fan_out});
        break;
    case LayerKind::conv2d:
        if (spec.kh == 0 || spec.kw == 0 || spec.cin == 0 || spec.cout == 0 || spec.stride == 0)
            throw ShapeError("conv2d: dims must be positive");
        if (in.size() != 3 || in[2] != spec.cin || in[0] < spec.kh || in[1] < spec.kw)
            throw ShapeError("conv2d: kernel does not fit input " + shape_string(in));
        if (spec.activation == Activation::softmax) throw ShapeError("conv2d: softmax activation is not supported");
        out = {conv_out_extent(in[0], spec.kh, spec.stride), conv_out_extent(in[1], spec.kw, spec.stride), spec.cout};
        state.weights = Tensor({spec.kh, spec.kw, spec.cin, spec.cout});
        state.bias = Tensor({spec.cout});
        break;
    case LayerKind::activation:
        if (spec.activation == Activation::softmax && in.size() != 1)
            throw ShapeError("softmax layer expects a flat input");
        out = in;
        break;
    case LayerKind::flatten: {
        std::size_t n = 1;
        for (auto d : in) n *= d;
        out = {n};
        break;
    }
    }
    if (spec.kind == LayerKind::dense && spec.activation == Activation::softmax && out.size() != 1)
        throw ShapeError("softmax expects a flat output");

    if (spec.trainable()) trainable_.push_back(specs_.size());
    specs_.push_back(spec);
    states_.push_back(std::move(state));
    shapes_.push_back(std::move(out));
    cache_valid_ = false;
    return *this;
}

void Network::initialize(std::uint64_t seed) {
    Rng rng(seed);
    for (std::size_t t = 0; t < trainable_.size(); ++t) {
        const LayerSpec& s = trainable_spec(t);
        const double fan_in = s.kind == LayerKind::dense ? double(s.fan_in) : double(s.kh * s.kw * s.cin);
        const double limit = std::sqrt(6.0 / fan_in);
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (auto& w : weights(t).values()) w = dist(rng);
        bias(t).fill(0.0);
    }
    cache_valid_ = false;
}

std::size_t Network::parameter_count() const noexcept {
    std::size_t n = 0;
    for (auto i : trainable_) n += states_[i].weights.size() + states_[i].bias.size();
    return n;
}

void Network::check_input(const Tensor& x) const {
    const auto& want = shapes_.front();
    const auto& got = x.shape();
    if (got.size() != want.size() + 1 || !std::equal(want.begin(), want.end(), got.begin() + 1)) {
        throw ShapeError("network input: expected (batch," + shape_string(want).substr(1) + ", got " +
                         shape_string(got));
    }
}

Tensor Network::forward(const Tensor& x) const {
    check_input(x);
    Tensor h = x;
    for (std::size_t i = 0; i < specs_.size(); ++i) h = layer_forward(specs_[i], states_[i], h);
    return h;
}

std::vector<Tensor> Network::trainable_inputs(const Tensor& x) const {
    check_input(x);
    std::vector<Tensor> inputs;
    inputs.reserve(trainable_.size());
    Tensor h = x;
    for (std::size_t i = 0; i < specs_.size(); ++i) {
        if (specs_[i].trainable()) inputs.push_back(h);
        h = layer_forward(specs_[i], states_[i], h);
    }
    return inputs;
}

Tensor Network::forward_train(const Tensor& x, std::span<const double> dropout, Rng& rng) {
    check_input(x);
    if (!dropout.empty() && dropout.size() != trainable_.size())
        throw ShapeError("forward_train: need one dropout probability per trainable layer");
    for (double p : dropout)
        if (!(p >= 0.0 && p < 1.0)) throw DomainError("dropout probability must be in [0, 1)");

    Tensor h = x;
    std::size_t t = 0;
    for (std::size_t i = 0; i < specs_.size(); ++i) {
        const LayerSpec& spec = specs_[i];
        LayerState& st = states_[i];
        st.dropout_mask = Tensor();
        if (spec.trainable()) {
            const double p = dropout.empty() ? 0.0 : dropout[t];
            if (p > 0.0) {
                const double keep_scale = 1.0 / (1.0 - p);
                st.dropout_mask = Tensor(h.shape());
                for (std::size_t k = 0; k < h.size(); ++k) {
                    const double m = uniform01(rng) < p ? 0.0 : keep_scale;
                    st.dropout_mask[k] = m;
                    h[k] *= m;
                }
            }
            st.input = h;
            st.pre_activation = linear_forward(spec, st, h);
            st.output = activate(spec.activation, st.pre_activation);
            ++t;
        } else {
            st.input = h;
            st.pre_activation = h;
            st.output = layer_forward(spec, st, h);
        }
        h = st.output;
    }
    cache_valid_ = true;
    return h;
}

std::vector<LayerGrad> Network::backward(const Tensor& target, const PenaltyConfig* penalty, double weight_decay) {
    if (!cache_valid_) throw StaleCache("backward: no training-mode forward pass precedes this call");
    if (penalty && (penalty->anchor_weights.size() != trainable_.size() ||
                    penalty->anchor_biases.size() != trainable_.size()))
        throw ShapeError("backward: penalty anchor does not match the network");

    std::vector<LayerGrad> grads(trainable_.size());
    Tensor g = loss_gradient(states_.back().output, target, loss_);

    std::size_t t = trainable_.size();
    for (std::size_t i = specs_.size(); i-- > 0;) {
        const LayerSpec& spec = specs_[i];
        const LayerState& st = states_[i];
        switch (spec.kind) {
        case LayerKind::activation: g = activation_backward(spec.activation, st.pre_activation, st.output, g); break;
        case LayerKind::flatten: g = g.reshaped(st.input.shape()); break;
        case LayerKind::dense:
        case LayerKind::conv2d: {
            --t;
            LayerGrad& lg = grads[t];
            lg.weights = Tensor(st.weights.shape());
            lg.bias = Tensor(st.bias.shape());
            const Tensor gz = activation_backward(spec.activation, st.pre_activation, st.output, g);
            if (spec.kind == LayerKind::dense) {
                const std::size_t batch = gz.rows(), n_out = gz.cols(), n_in = st.input.cols();
                for (std::size_t b = 0; b < batch; ++b)
                    for (std::size_t k = 0; k < n_in; ++k) {
                        const double xv = st.input(b, k);
                        if (xv == 0.0) continue;
                        for (std::size_t j = 0; j < n_out; ++j) lg.weights(k, j) += xv * gz(b, j);
                    }
                for (std::size_t b = 0; b < batch; ++b)
                    for (std::size_t j = 0; j < n_out; ++j) lg.bias[j] += gz(b, j);
                g = matmul(gz, transpose(st.weights));
            } else {
                g = conv_backward(spec, st, st.input, gz, lg);
            }
            if (!st.dropout_mask.empty())
                for (std::size_t k = 0; k < g.size(); ++k) g[k] *= st.dropout_mask[k];

            if (weight_decay != 0.0)
                for (std::size_t k = 0; k < lg.weights.size(); ++k) lg.weights[k] += weight_decay * st.weights[k];
            if (penalty && penalty->gamma != 0.0) {
                const Tensor& aw = penalty->anchor_weights[t];
                const Tensor& ab = penalty->anchor_biases[t];
                require_same_shape(aw, st.weights, "penalty anchor weights");
                require_same_shape(ab, st.bias, "penalty anchor bias");
                for (std::size_t k = 0; k < lg.weights.size(); ++k)
                    lg.weights[k] += 2.0 * penalty->gamma * (st.weights[k] - aw[k]);
                for (std::size_t k = 0; k < lg.bias.size(); ++k)
                    lg.bias[k] += 2.0 * penalty->gamma * (st.bias[k] - ab[k]);
            }
            break;
        }
        }
    }
    cache_valid_ = false;
    return grads;
}

double lrf_penalty_loss(const Network& net, double base_loss, const PenaltyConfig& cfg) {
    if (cfg.gamma < 0.0) throw DomainError("penalty gamma must be nonnegative");
    const std::size_t layers = net.trainable_count();
    if (cfg.anchor_weights.size() != layers || cfg.anchor_biases.size() != layers)
        throw ShapeError("lrf_penalty_loss: anchor has " + std::to_string(cfg.anchor_weights.size()) +
                         " layers, network has " + std::to_string(layers));
    if (cfg.gamma == 0.0) return base_loss;
    double sum = 0.0;
    for (std::size_t t = 0; t < layers; ++t) {
        sum += squared_norm(net.weights(t) - cfg.anchor_weights[t]);
        sum += squared_norm(net.bias(t) - cfg.anchor_biases[t]);
    }
    return base_loss + cfg.gamma * sum;
}

PenaltyConfig make_lrf_anchor(const Network& snapshot, double gamma) {
    if (gamma < 0.0) throw DomainError("penalty gamma must be nonnegative");
    PenaltyConfig cfg;
    cfg.gamma = gamma;
    for (std::size_t t = 0; t < snapshot.trainable_count(); ++t) {
        cfg.anchor_weights.push_back(lrf_simplify(snapshot.weights(t)));
        cfg.anchor_biases.push_back(snapshot.bias(t));
    }
    return cfg;
}

} // namespace alrf
