#pragma once

#include "alrf/trainer.hpp"

#include <filesystem>
#include <string>

namespace alrf {

/// Shortest round-trip decimal form; "nan"/"inf" for non-finite values.
std::string format_number(double v);

inline constexpr const char* kHistoryCsvHeader =
    "epoch,train_loss,train_acc,val_loss,val_acc,test_loss,test_acc,v,sncn,triggered";

/// One row per epoch under kHistoryCsvHeader. A NaN sncn is left empty.
void write_history_csv(const RunHistory& history, const std::filesystem::path& path);

/// One JSON object per epoch with every metric (including F-measures).
void write_history_jsonl(const RunHistory& history, const std::filesystem::path& path);

/// Condition reports and controller actions, interleaved by epoch.
void write_trace_jsonl(const RunHistory& history, const std::filesystem::path& path);

} // namespace alrf
