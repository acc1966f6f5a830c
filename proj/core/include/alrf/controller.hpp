#pragma once

#include "alrf/conditioning.hpp"
#include "alrf/netcore.hpp"
#include "alrf/optim.hpp"
#include "alrf/random.hpp"

#include <cstdint>
#include <deque>
#include <limits>
#include <string>
#include <vector>

namespace alrf {

inline constexpr double kMaxOverfitRatio = 1e6;
inline constexpr double kMinTrainError = 1e-12;

/// Sliding window of validation/train error ratios.
class OverfitSignal {
public:
    explicit OverfitSignal(std::size_t patience = 3, double tau = 1.4);

    /// v = val_err / train_err, pushed into the window. A train error at or
    /// below 1e-12 records the cap 1e6.
    double record_errors(double train_err, double val_err);

    /// False until `patience` values are held; then mean(window) > tau.
    bool overfit_detected() const;

    double window_mean() const;
    const std::deque<double>& window() const noexcept { return window_; }
    std::size_t patience() const noexcept { return patience_; }
    double tau() const noexcept { return tau_; }
    void clear() noexcept { window_.clear(); }

private:
    std::deque<double> window_;
    std::size_t patience_;
    double tau_;
};

enum class StrategyKind { first_k, last_d, adaptive_random };

std::string to_string(StrategyKind k);
StrategyKind parse_strategy(const std::string& s);

struct Strategy {
    StrategyKind kind = StrategyKind::adaptive_random;
    std::size_t count = 1; // k for first_k, d for last_d
};

/// How conv kernels are simplified: per-input-channel slices (tensor) or as a
/// single flattened matrix. Dense weights are treated the same either way.
enum class SimplifyMode { matrix, tensor };

/// Trainable-layer indices (0-based) to simplify. adaptive_random includes
/// layer l iff an independent draw r in [0, 1) satisfies r <= gamma[l].
std::vector<std::size_t> select_layers(const Strategy& strategy, const std::vector<double>& gamma,
                                       std::size_t layer_count, Rng& rng);

/// Replaces each selected layer's weights by their rank-1 simplification.
/// Biases are left untouched. When `optim` is given, the weight moments of
/// replaced layers are zeroed. Returns the number of layers modified.
std::size_t apply_regularization(Network& net, const std::vector<std::size_t>& selected, SimplifyMode mode,
                                 OptimState* optim = nullptr);

struct ControllerConfig {
    double tau = 1.4;
    std::size_t patience = 3;
    Strategy strategy{};
    SimplifyMode mode = SimplifyMode::tensor;
    bool reset_moments = true;
};

struct ActionLog {
    int epoch = 0;
    double v = 0.0;
    double mean_v = std::numeric_limits<double>::quiet_NaN(); // NaN while the window warms up
    bool triggered = false;
    std::vector<std::size_t> selected_layers;
    double sncn_before = 0.0;
    double sncn_after = 0.0;
};

std::string to_json_line(const ActionLog& log);

/// Per-epoch overfitting monitor and weight simplifier.
class Controller {
public:
    Controller(ControllerConfig config, std::uint64_t seed);

    /// Records v(t); on detection selects layers from `report`, simplifies
    /// them and clears the window. sncn_after equals sncn_before here; the
    /// trainer refreshes it from a new report when layers changed.
    ActionLog step(int epoch, Network& net, double train_err, double val_err, const ConditionReport& report,
                   OptimState* optim = nullptr);

    const OverfitSignal& signal() const noexcept { return signal_; }
    const ControllerConfig& config() const noexcept { return config_; }

private:
    ControllerConfig config_;
    OverfitSignal signal_;
    Rng rng_;
};

} // namespace alrf
