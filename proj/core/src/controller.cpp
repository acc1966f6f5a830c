#include "alrf/controller.hpp"

#include "alrf/errors.hpp"
#include "alrf/linalg.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace alrf {

OverfitSignal::OverfitSignal(std::size_t patience, double tau) : patience_(patience), tau_(tau) {
    if (patience == 0) throw DomainError("patience must be at least 1");
}

double OverfitSignal::record_errors(double train_err, double val_err) {
    double v = train_err <= kMinTrainError ? kMaxOverfitRatio : val_err / train_err;
    v = std::clamp(v, kMinTrainError, kMaxOverfitRatio);
    window_.push_back(v);
    while (window_.size() > patience_) window_.pop_front();
    return v;
}

double OverfitSignal::window_mean() const {
    if (window_.empty()) return std::numeric_limits<double>::quiet_NaN();
    return std::accumulate(window_.begin(), window_.end(), 0.0) / double(window_.size());
}

bool OverfitSignal::overfit_detected() const { return window_.size() >= patience_ && window_mean() > tau_; }

std::string to_string(StrategyKind k) {
    switch (k) {
    case StrategyKind::first_k: return "first_k";
    case StrategyKind::last_d: return "last_d";
    case StrategyKind::adaptive_random: return "adaptive_random";
    }
    return "?";
}

StrategyKind parse_strategy(const std::string& s) {
    for (auto k : {StrategyKind::first_k, StrategyKind::last_d, StrategyKind::adaptive_random})
        if (to_string(k) == s) return k;
    throw DomainError("unknown strategy '" + s + "'");
}

std::vector<std::size_t> select_layers(const Strategy& strategy, const std::vector<double>& gamma,
                                       std::size_t layer_count, Rng& rng) {
    std::vector<std::size_t> selected;
    switch (strategy.kind) {
    case StrategyKind::first_k:
    case StrategyKind::last_d: {
        if (strategy.count < 1 || strategy.count > layer_count)
            throw DomainError("strategy layer count must lie in [1, " + std::to_string(layer_count) + "]");
        const std::size_t first = strategy.kind == StrategyKind::first_k ? 0 : layer_count - strategy.count;
        for (std::size_t l = first; l < first + strategy.count; ++l) selected.push_back(l);
        break;
    }
    case StrategyKind::adaptive_random:
        if (gamma.size() != layer_count) throw ShapeError("select_layers: need one gamma per layer");
        for (std::size_t l = 0; l < layer_count; ++l) {
            const double r = uniform01(rng);
            if (r <= gamma[l]) selected.push_back(l);
        }
        break;
    }
    return selected;
}

std::size_t apply_regularization(Network& net, const std::vector<std::size_t>& selected, SimplifyMode mode,
                                 OptimState* optim) {
    std::size_t count = 0;
    for (std::size_t t : selected) {
        if (t >= net.trainable_count()) throw ShapeError("apply_regularization: layer index out of range");
        Tensor& w = net.weights(t);
        w = (mode == SimplifyMode::matrix && w.rank() == 4) ? lrf_simplify_flattened(w) : lrf_simplify(w);
        if (optim) optim->reset_weight_moments(t);
        ++count;
    }
    if (count) net.invalidate_cache();
    return count;
}

std::string to_json_line(const ActionLog& log) {
    nlohmann::json j{{"type", "action"},
                     {"epoch", log.epoch},
                     {"v", log.v},
                     {"mean_v", std::isnan(log.mean_v) ? nlohmann::json(nullptr) : nlohmann::json(log.mean_v)},
                     {"triggered", log.triggered},
                     {"selected_layers", log.selected_layers},
                     {"sncn_before", log.sncn_before},
                     {"sncn_after", log.sncn_after}};
    return j.dump();
}

Controller::Controller(ControllerConfig config, std::uint64_t seed)
    : config_(config), signal_(config.patience, config.tau), rng_(seed) {}

ActionLog Controller::step(int epoch, Network& net, double train_err, double val_err, const ConditionReport& report,
                           OptimState* optim) {
    ActionLog log;
    log.epoch = epoch;
    log.v = signal_.record_errors(train_err, val_err);
    if (signal_.window().size() >= signal_.patience()) log.mean_v = signal_.window_mean();
    log.sncn_before = report.sncn;
    log.sncn_after = report.sncn;
    if (!signal_.overfit_detected()) return log;

    log.triggered = true;
    std::vector<double> gamma;
    if (config_.strategy.kind == StrategyKind::adaptive_random) {
        try {
            gamma = normalize_condition_numbers(report.kappa);
        } catch (const AllZero&) {
            signal_.clear();
            return log;
        }
    }
    log.selected_layers = select_layers(config_.strategy, gamma, net.trainable_count(), rng_);
    apply_regularization(net, log.selected_layers, config_.mode, config_.reset_moments ? optim : nullptr);
    signal_.clear();
    return log;
}

} // namespace alrf
