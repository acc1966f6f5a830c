#pragma once

#include "alrf/config.hpp"
#include "alrf/trainer.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace alrf {

struct ExperimentOptions {
    std::filesystem::path out_dir = "out";
    std::optional<std::uint64_t> seed_override;
    bool write_checkpoints = false;
    bool write_summary = true;
    bool write_condition_traces = false;
    bool keep_networks = false; // keep RunResult::final_network after the run
    std::ostream* log = nullptr; // progress lines; null for quiet
};

struct RunResult {
    std::string regularizer;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    RunHistory history;
    Metrics train, test; // final-epoch (or untrained, for zero epochs) metrics
    double final_sncn = std::numeric_limits<double>::quiet_NaN();
    std::optional<Network> final_network;
    std::filesystem::path dir;
};

struct SummaryRow {
    std::string regularizer;
    std::size_t runs = 0;
    std::size_t failed = 0;
    // mean and sample standard deviation over successful runs
    double train_acc_mean = 0, train_acc_std = 0;
    double train_loss_mean = 0, train_loss_std = 0;
    double test_acc_mean = 0, test_acc_std = 0;
    double test_loss_mean = 0, test_loss_std = 0;
    double test_f_mean = 0, test_f_std = 0;
    double sncn_mean = 0, sncn_std = 0;
};

struct ExperimentResult {
    std::vector<RunResult> runs;
    std::vector<SummaryRow> summary;
    std::size_t failed() const;
};

inline constexpr const char* kSummaryCsvHeader =
    "regularizer,runs,failed,train_acc_mean,train_acc_std,train_loss_mean,train_loss_std,test_acc_mean,"
    "test_acc_std,test_loss_mean,test_loss_std,test_f_mean,test_f_std,sncn_mean,sncn_std";

Dataset load_dataset(const DatasetConfig& cfg);

/// One (regularizer, seed) run. Splits, initialization and every training
/// stream derive from `seed` alone, so a run does not depend on its siblings.
RunResult run_single(const RunConfig& cfg, const Dataset& data, const Regularizer& reg, std::uint64_t seed);

/// Runs the regularizer x seed matrix and writes per-run artifacts under
/// out_dir/runs/<label>_seed<seed>/ plus the optional summary and traces.
/// Individual run failures are recorded and the remaining runs proceed.
ExperimentResult run_experiment(const RunConfig& cfg, const ExperimentOptions& options);

std::vector<SummaryRow> summarize(const RunConfig& cfg, const std::vector<RunResult>& runs);
void write_summary_csv(const std::vector<SummaryRow>& rows, const std::filesystem::path& path);

std::string sanitize_label(const std::string& label);

} // namespace alrf
