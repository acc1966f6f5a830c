#include "alrf/trainer.hpp"

#include "alrf/checkpoint.hpp"
#include "alrf/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace alrf {

double macro_f1(std::span<const std::size_t> labels, std::span<const std::size_t> predictions, std::size_t classes) {
    if (labels.size() != predictions.size()) throw ShapeError("macro_f1: label/prediction count mismatch");
    std::vector<double> tp(classes, 0.0), fp(classes, 0.0), fn(classes, 0.0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= classes || predictions[i] >= classes) throw DomainError("macro_f1: class out of range");
        if (labels[i] == predictions[i]) {
            tp[labels[i]] += 1.0;
        } else {
            fp[predictions[i]] += 1.0;
            fn[labels[i]] += 1.0;
        }
    }
    double sum = 0.0;
    std::size_t present = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        const double denom = 2.0 * tp[c] + fp[c] + fn[c];
        if (denom == 0.0) continue;
        sum += 2.0 * tp[c] / denom;
        ++present;
    }
    return present ? sum / double(present) : 0.0;
}

Metrics evaluate(const Network& net, const Dataset& data) {
    std::vector<std::size_t> rows(data.size());
    std::iota(rows.begin(), rows.end(), 0);
    const Tensor pred = net.forward(data.batch(rows, net.input_shape()));
    Metrics m;
    if (!pred.all_finite()) {
        m.loss = m.accuracy = m.f_measure = std::numeric_limits<double>::quiet_NaN();
        return m;
    }
    m.loss = loss(pred, data.one_hot(), net.loss_kind());

    const std::size_t classes = pred.cols();
    std::vector<std::size_t> predicted(data.size());
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::size_t arg = 0;
        for (std::size_t c = 1; c < classes; ++c)
            if (pred(i, c) > pred(i, arg)) arg = c;
        predicted[i] = arg;
        correct += arg == data.labels[i];
    }
    m.accuracy = double(correct) / double(data.size());
    m.f_measure = macro_f1(data.labels, predicted, std::max(classes, data.classes));
    return m;
}

std::vector<double> dropout_plan(const Network& net, double p) {
    std::vector<double> plan(net.trainable_count(), p);
    if (!plan.empty()) plan[0] = 0.0;
    return plan;
}

namespace {

bool finite(const Metrics& m) { return std::isfinite(m.loss); }

std::vector<std::size_t> draw_probe(std::size_t population, std::size_t size, Rng& rng) {
    std::vector<std::size_t> idx(population);
    std::iota(idx.begin(), idx.end(), 0);
    const std::size_t k = std::min(size, population);
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, population - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(k);
    return idx;
}

} // namespace

RunHistory fit(Network& net, const DataSplits& data, const TrainConfig& config) {
    RunHistory history;
    if (config.epochs == 0) return history;
    if (config.batch_size == 0) throw DomainError("batch size must be positive");
    if (data.train.classes != net.output_shape().at(0))
        throw ShapeError("network output width does not match the class count");

    OptimState optim = OptimState::for_network(net, config.adam);
    Rng shuffle_rng(derive_seed(config.seed, streams::shuffle));
    Rng dropout_rng(derive_seed(config.seed, streams::dropout));
    Rng probe_rng(derive_seed(config.seed, streams::probe));
    std::optional<Controller> controller;
    if (config.adaptive) controller.emplace(*config.adaptive, derive_seed(config.seed, streams::controller));

    const std::vector<double> dropout = config.dropout > 0.0 ? dropout_plan(net, config.dropout) : std::vector<double>{};
    std::optional<PenaltyConfig> anchor;
    const bool need_reports = config.track_conditions || config.adaptive.has_value();

    std::vector<std::size_t> order(data.train.size());
    std::iota(order.begin(), order.end(), 0);
    Network last_good = net;
    std::size_t since_best = 0;

    for (std::size_t e = 1; e <= config.epochs; ++e) {
        const int epoch = int(e);
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::span<const std::size_t> rows =
                std::span<const std::size_t>(order).subspan(start, std::min(config.batch_size, order.size() - start));
            const Tensor x = data.train.batch(rows, net.input_shape());
            const Tensor y = data.train.one_hot(rows);
            const Tensor pred = net.forward_train(x, dropout, dropout_rng);
            if (!pred.all_finite()) {
                if (!config.failure_checkpoint.empty()) save_checkpoint(last_good, config.failure_checkpoint);
                throw NonFiniteLoss("non-finite network output during epoch " + std::to_string(epoch), last_good,
                                    epoch);
            }
            const auto grads = net.backward(y, anchor ? &*anchor : nullptr, config.weight_decay);
            adam_step(net, grads, optim);
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train = evaluate(net, data.train);
        rec.validation = evaluate(net, data.validation);
        rec.test = evaluate(net, data.test);
        if (!finite(rec.train) || !finite(rec.validation) || !finite(rec.test)) {
            if (!config.failure_checkpoint.empty()) save_checkpoint(last_good, config.failure_checkpoint);
            throw NonFiniteLoss("non-finite loss at epoch " + std::to_string(epoch), last_good, epoch);
        }
        last_good = net;

        if (rec.validation.loss < history.best_val_loss) {
            history.best_val_loss = rec.validation.loss;
            history.best_epoch = epoch;
            history.best = net;
            since_best = 0;
            if (config.penalty_gamma) anchor = make_lrf_anchor(net, *config.penalty_gamma);
        } else {
            ++since_best;
        }

        std::optional<ConditionReport> report;
        Tensor probe;
        if (need_reports) {
            const auto rows = draw_probe(data.validation.size(), config.probe_size, probe_rng);
            probe = data.validation.batch(rows, net.input_shape());
            report = condition_report(net, probe, epoch);
            rec.sncn = report->sncn;
            if (config.track_conditions) history.conditions.push_back(*report);
        }

        if (controller) {
            std::optional<Network> before;
            if (config.on_controller_step) before = net;
            ActionLog log = controller->step(epoch, net, rec.train.loss, rec.validation.loss, *report, &optim);
            rec.v = log.v;
            rec.triggered = log.triggered;
            if (!log.selected_layers.empty()) log.sncn_after = condition_report(net, probe, epoch).sncn;
            if (config.on_controller_step) config.on_controller_step(*before, net, log, *report);
            history.actions.push_back(std::move(log));
        } else {
            OverfitSignal ratio(1, std::numeric_limits<double>::infinity());
            rec.v = ratio.record_errors(rec.train.loss, rec.validation.loss);
        }
        history.epochs.push_back(rec);

        if (config.early_stop_patience > 0 && since_best >= config.early_stop_patience) break;
    }
    return history;
}

} // namespace alrf
