#include "alrf/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>

namespace alrf {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

nlohmann::json metrics_json(const Metrics& m) {
    return {{"loss", m.loss}, {"accuracy", m.accuracy}, {"f_measure", m.f_measure}};
}

} // namespace

void write_history_csv(const RunHistory& history, const std::filesystem::path& path) {
    auto out = open_for_write(path);
    out << kHistoryCsvHeader << '\n';
    for (const auto& r : history.epochs) {
        out << r.epoch << ',' << format_number(r.train.loss) << ',' << format_number(r.train.accuracy) << ','
            << format_number(r.validation.loss) << ',' << format_number(r.validation.accuracy) << ','
            << format_number(r.test.loss) << ',' << format_number(r.test.accuracy) << ',' << format_number(r.v)
            << ',' << (std::isnan(r.sncn) ? std::string() : format_number(r.sncn)) << ','
            << (r.triggered ? 1 : 0) << '\n';
    }
}

void write_history_jsonl(const RunHistory& history, const std::filesystem::path& path) {
    auto out = open_for_write(path);
    for (const auto& r : history.epochs) {
        nlohmann::json j{{"epoch", r.epoch},
                         {"train", metrics_json(r.train)},
                         {"validation", metrics_json(r.validation)},
                         {"test", metrics_json(r.test)},
                         {"v", r.v},
                         {"sncn", std::isnan(r.sncn) ? nlohmann::json(nullptr) : nlohmann::json(r.sncn)},
                         {"triggered", r.triggered}};
        out << j.dump() << '\n';
    }
}

void write_trace_jsonl(const RunHistory& history, const std::filesystem::path& path) {
    auto out = open_for_write(path);
    std::size_t a = 0;
    for (const auto& c : history.conditions) {
        out << to_json_line(c) << '\n';
        while (a < history.actions.size() && history.actions[a].epoch <= c.epoch) out << to_json_line(history.actions[a++]) << '\n';
    }
    while (a < history.actions.size()) out << to_json_line(history.actions[a++]) << '\n';
}

} // namespace alrf
