#include "alrf/conditioning.hpp"

#include "alrf/errors.hpp"
#include "alrf/linalg.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace alrf {

namespace {

void require_trainable(const LayerSpec& spec) {
    if (!spec.trainable()) throw ShapeError("condition numbers are defined for dense and conv2d layers only");
}

double theta_norm(const LayerState& state) {
    return std::sqrt(squared_norm(state.weights) + squared_norm(state.bias));
}

} // namespace

double jacobian_fro_norm(const LayerSpec& spec, const LayerState& state, const Tensor& batch) {
    require_trainable(spec);
    const Tensor z = linear_forward(spec, state, batch);
    const Tensor y = activate(spec.activation, z);
    double total = 0.0;

    if (spec.kind == LayerKind::dense) {
        const std::size_t samples = batch.rows(), n_in = batch.cols(), n_out = z.cols();
        for (std::size_t b = 0; b < samples; ++b) {
            double x2 = 1.0;
            for (std::size_t k = 0; k < n_in; ++k) x2 += batch(b, k) * batch(b, k);
            double d2 = 0.0;
            if (spec.activation == Activation::softmax) {
                for (std::size_t i = 0; i < n_out; ++i)
                    for (std::size_t j = 0; j < n_out; ++j) {
                        const double d = (i == j ? y(b, i) : 0.0) - y(b, i) * y(b, j);
                        d2 += d * d;
                    }
            } else {
                for (std::size_t j = 0; j < n_out; ++j) {
                    const double d = activation_derivative(spec.activation, z(b, j), y(b, j));
                    d2 += d * d;
                }
            }
            total += d2 * x2;
        }
        return std::sqrt(total);
    }

    // conv2d: accumulate per output pixel.
    const auto& xs = batch.shape();
    const std::size_t samples = xs[0], h = xs[1], w = xs[2], cin = xs[3];
    const std::size_t ho = z.dim(1), wo = z.dim(2), cout = spec.cout;
    for (std::size_t b = 0; b < samples; ++b)
        for (std::size_t oy = 0; oy < ho; ++oy)
            for (std::size_t ox = 0; ox < wo; ++ox) {
                double patch2 = 1.0;
                for (std::size_t ky = 0; ky < spec.kh; ++ky)
                    for (std::size_t kx = 0; kx < spec.kw; ++kx) {
                        const std::size_t off = ((b * h + oy * spec.stride + ky) * w + ox * spec.stride + kx) * cin;
                        for (std::size_t ci = 0; ci < cin; ++ci) patch2 += batch[off + ci] * batch[off + ci];
                    }
                const std::size_t out = ((b * ho + oy) * wo + ox) * cout;
                double d2 = 0.0;
                for (std::size_t co = 0; co < cout; ++co) {
                    const double d = activation_derivative(spec.activation, z[out + co], y[out + co]);
                    d2 += d * d;
                }
                total += d2 * patch2;
            }
    return std::sqrt(total);
}

double jacobian_fro_norm_fd(const LayerSpec& spec, const LayerState& state, const Tensor& batch, double h) {
    require_trainable(spec);
    const std::size_t params = state.weights.size() + state.bias.size();
    if (params > kFiniteDifferenceMaxParams)
        throw DomainError("jacobian_fro_norm_fd: " + std::to_string(params) + " parameters exceeds the oracle limit");

    LayerState probe{state.weights, state.bias, {}, {}, {}, {}};
    double total = 0.0;
    auto column = [&](double& slot) {
        const double saved = slot;
        slot = saved + h;
        const Tensor plus = layer_forward(spec, probe, batch);
        slot = saved - h;
        const Tensor minus = layer_forward(spec, probe, batch);
        slot = saved;
        for (std::size_t i = 0; i < plus.size(); ++i) {
            const double d = (plus[i] - minus[i]) / (2.0 * h);
            total += d * d;
        }
    };
    for (auto& w : probe.weights.values()) column(w);
    for (auto& b : probe.bias.values()) column(b);
    return std::sqrt(total);
}

namespace {

double condition_ratio(const LayerSpec& spec, const LayerState& state, const Tensor& batch, double jac) {
    const double f = frobenius_norm(layer_forward(spec, state, batch));
    if (f < kDegenerateOutputNorm) throw DegenerateOutput("layer output norm is below 1e-12");
    return jac * theta_norm(state) / f;
}

} // namespace

double layer_condition_number(const LayerSpec& spec, const LayerState& state, const Tensor& batch) {
    return condition_ratio(spec, state, batch, jacobian_fro_norm(spec, state, batch));
}

double layer_condition_number_fd(const LayerSpec& spec, const LayerState& state, const Tensor& batch, double h) {
    return condition_ratio(spec, state, batch, jacobian_fro_norm_fd(spec, state, batch, h));
}

std::vector<double> normalize_condition_numbers(std::span<const double> kappa) {
    if (kappa.empty()) throw AllZero("normalize_condition_numbers: no layers");
    for (double k : kappa)
        if (!(k >= 0.0) || !std::isfinite(k)) throw DomainError("condition numbers must be finite and nonnegative");
    const double mx = *std::max_element(kappa.begin(), kappa.end());
    if (mx == 0.0) throw AllZero("every condition number is zero");
    std::vector<double> gamma(kappa.size());
    std::transform(kappa.begin(), kappa.end(), gamma.begin(), [mx](double k) { return k / mx; });
    return gamma;
}

double sncn(std::span<const double> gamma) { return std::accumulate(gamma.begin(), gamma.end(), 0.0); }

ConditionReport condition_report(const Network& net, const Tensor& probe, int epoch) {
    ConditionReport report;
    report.epoch = epoch;
    const std::vector<Tensor> inputs = net.trainable_inputs(probe);
    const std::size_t layers = net.trainable_count();
    report.kappa.assign(layers, 0.0);
    std::vector<bool> degenerate(layers, false);
    for (std::size_t t = 0; t < layers; ++t) {
        try {
            report.kappa[t] = layer_condition_number(net.trainable_spec(t), net.trainable_state(t), inputs[t]);
        } catch (const DegenerateOutput&) {
            degenerate[t] = true;
        }
    }
    double mx = 0.0;
    for (std::size_t t = 0; t < layers; ++t)
        if (!degenerate[t]) mx = std::max(mx, report.kappa[t]);
    for (std::size_t t = 0; t < layers; ++t)
        if (degenerate[t]) report.kappa[t] = mx;

    try {
        report.gamma = normalize_condition_numbers(report.kappa);
        report.sncn = sncn(report.gamma);
    } catch (const AllZero&) {
        report.gamma.assign(layers, 0.0);
        report.sncn = 0.0;
    }
    return report;
}

std::string to_json_line(const ConditionReport& report) {
    nlohmann::json j{{"type", "condition"},
                     {"epoch", report.epoch},
                     {"kappa", report.kappa},
                     {"gamma", report.gamma},
                     {"sncn", report.sncn}};
    return j.dump();
}

} // namespace alrf
