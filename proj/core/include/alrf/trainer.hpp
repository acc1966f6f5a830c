#pragma once

#include "alrf/conditioning.hpp"
#include "alrf/controller.hpp"
#include "alrf/dataset.hpp"
#include "alrf/errors.hpp"
#include "alrf/netcore.hpp"
#include "alrf/optim.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace alrf {

struct Metrics {
    double loss = 0.0;
    double accuracy = 0.0;
    double f_measure = 0.0; // macro-averaged F1
};

/// Macro F1 over classes that occur in labels or predictions.
double macro_f1(std::span<const std::size_t> labels, std::span<const std::size_t> predictions, std::size_t classes);

/// Eval-mode loss, argmax accuracy and macro F1. A non-finite network output
/// yields NaN loss.
Metrics evaluate(const Network& net, const Dataset& data);

struct TrainConfig {
    std::size_t epochs = 0;
    std::size_t batch_size = 32;
    AdamConfig adam{};
    double weight_decay = 0.0;
    /// Inverted-dropout probability on the inputs of every trainable layer
    /// after the first (i.e. on hidden units).
    double dropout = 0.0;
    std::optional<ControllerConfig> adaptive;
    /// Enables the LRF-based penalty with this gamma.
    std::optional<double> penalty_gamma;
    std::size_t probe_size = 64;
    bool track_conditions = true;
    /// Stop after this many epochs without a new best validation loss; 0 disables.
    std::size_t early_stop_patience = 0;
    std::uint64_t seed = 0;
    /// Where the last finite parameters are written on NonFiniteLoss (optional).
    std::filesystem::path failure_checkpoint;
    /// Called after every controller step with the network before and after it.
    std::function<void(const Network& before, const Network& after, const ActionLog&, const ConditionReport&)>
        on_controller_step;
};

struct EpochRecord {
    int epoch = 0;
    Metrics train, validation, test;
    double v = 0.0;
    double sncn = std::numeric_limits<double>::quiet_NaN();
    bool triggered = false;
};

struct RunHistory {
    std::vector<EpochRecord> epochs;
    std::vector<ConditionReport> conditions;
    std::vector<ActionLog> actions;
    std::optional<Network> best; // parameters with the lowest validation loss so far
    int best_epoch = 0;
    double best_val_loss = std::numeric_limits<double>::infinity();
};

class NonFiniteLoss : public Error {
public:
    NonFiniteLoss(const std::string& what, Network last_good, int epoch)
        : Error(what), last_good_(std::move(last_good)), epoch_(epoch) {}
    const Network& last_good() const noexcept { return last_good_; }
    int epoch() const noexcept { return epoch_; }

private:
    Network last_good_;
    int epoch_;
};

/// Per-layer dropout probabilities for `net` under `cfg` (first layer 0).
std::vector<double> dropout_plan(const Network& net, double p);

/// Trains `net` in place. Each epoch: shuffled minibatch Adam passes,
/// evaluation on every split, a condition report on a probe batch drawn from
/// the validation split, the AdaptiveLRF step (if enabled) and the
/// best-validation snapshot. With the penalty enabled the anchor is the
/// rank-1 simplification of the current snapshot.
RunHistory fit(Network& net, const DataSplits& data, const TrainConfig& config);

} // namespace alrf
