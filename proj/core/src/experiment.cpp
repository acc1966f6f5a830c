#include "alrf/experiment.hpp"

#include "alrf/checkpoint.hpp"
#include "alrf/io.hpp"
#include "alrf/random.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

namespace alrf {

std::size_t ExperimentResult::failed() const {
    std::size_t n = 0;
    for (const auto& r : runs) n += r.ok ? 0 : 1;
    return n;
}

Dataset load_dataset(const DatasetConfig& cfg) {
    if (cfg.source == DatasetConfig::Source::synthetic)
        return make_noisy_surface_dataset(cfg.samples, cfg.noise, cfg.seed);
    return load_csv(cfg.path, cfg.label_column, cfg.normalize);
}

std::string sanitize_label(const std::string& label) {
    std::string s;
    for (char c : label) {
        const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
                          c == '-' || c == '_';
        s += keep ? c : '_';
    }
    return s;
}

RunResult run_single(const RunConfig& cfg, const Dataset& data, const Regularizer& reg, std::uint64_t seed) {
    RunResult result;
    result.regularizer = reg.label;
    result.seed = seed;

    const DataSplits splits = split_dataset(data, cfg.split_train, cfg.split_validation, cfg.split_test,
                                            derive_seed(seed, streams::split));
    Network net = build_network(cfg.network, data.feature_count(), data.classes);
    net.initialize(derive_seed(seed, streams::init));

    const TrainConfig tc = train_config_for(cfg, reg, seed);
    result.history = fit(net, splits, tc);
    if (result.history.epochs.empty()) {
        result.train = evaluate(net, splits.train);
        result.test = evaluate(net, splits.test);
    } else {
        const EpochRecord& last = result.history.epochs.back();
        result.train = last.train;
        result.test = last.test;
        result.final_sncn = last.sncn;
    }
    result.final_network = std::move(net);
    result.ok = true;
    return result;
}

namespace {

struct MeanStd {
    double mean = 0.0, std = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd m;
    if (xs.empty()) return {std::nan(""), std::nan("")};
    for (double x : xs) m.mean += x;
    m.mean /= double(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - m.mean) * (x - m.mean);
        m.std = std::sqrt(ss / double(xs.size() - 1));
    }
    return m;
}

} // namespace

std::vector<SummaryRow> summarize(const RunConfig& cfg, const std::vector<RunResult>& runs) {
    std::vector<SummaryRow> rows;
    for (const auto& reg : cfg.regularizers) {
        SummaryRow row;
        row.regularizer = reg.label;
        std::vector<double> tra, trl, tea, tel, tef, sn;
        for (const auto& r : runs) {
            if (r.regularizer != reg.label) continue;
            ++row.runs;
            if (!r.ok) {
                ++row.failed;
                continue;
            }
            tra.push_back(r.train.accuracy);
            trl.push_back(r.train.loss);
            tea.push_back(r.test.accuracy);
            tel.push_back(r.test.loss);
            tef.push_back(r.test.f_measure);
            if (!std::isnan(r.final_sncn)) sn.push_back(r.final_sncn);
        }
        auto set = [](const std::vector<double>& xs, double& mean, double& sd) {
            const MeanStd m = mean_std(xs);
            mean = m.mean;
            sd = m.std;
        };
        set(tra, row.train_acc_mean, row.train_acc_std);
        set(trl, row.train_loss_mean, row.train_loss_std);
        set(tea, row.test_acc_mean, row.test_acc_std);
        set(tel, row.test_loss_mean, row.test_loss_std);
        set(tef, row.test_f_mean, row.test_f_std);
        set(sn, row.sncn_mean, row.sncn_std);
        rows.push_back(row);
    }
    return rows;
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << kSummaryCsvHeader << '\n';
    for (const auto& r : rows) {
        out << r.regularizer << ',' << r.runs << ',' << r.failed;
        for (double v : {r.train_acc_mean, r.train_acc_std, r.train_loss_mean, r.train_loss_std, r.test_acc_mean,
                         r.test_acc_std, r.test_loss_mean, r.test_loss_std, r.test_f_mean, r.test_f_std, r.sncn_mean,
                         r.sncn_std})
            out << ',' << format_number(v);
        out << '\n';
    }
}

namespace {

void write_condition_traces(const std::vector<RunResult>& runs, const std::filesystem::path& dir) {
    std::ofstream sncn(dir / "sncn_trace.csv", std::ios::binary);
    std::ofstream kappa(dir / "kappa_trace.csv", std::ios::binary);
    if (!sncn || !kappa) throw Error("cannot write condition traces in " + dir.string());
    sncn << "regularizer,seed,epoch,sncn,triggered\n";
    kappa << "regularizer,seed,epoch,layer,kappa,gamma\n";
    for (const auto& r : runs) {
        if (!r.ok) continue;
        for (const auto& e : r.history.epochs) {
            sncn << r.regularizer << ',' << r.seed << ',' << e.epoch << ','
                 << (std::isnan(e.sncn) ? std::string() : format_number(e.sncn)) << ',' << (e.triggered ? 1 : 0)
                 << '\n';
        }
        for (const auto& c : r.history.conditions)
            for (std::size_t l = 0; l < c.kappa.size(); ++l)
                kappa << r.regularizer << ',' << r.seed << ',' << c.epoch << ',' << l << ','
                      << format_number(c.kappa[l]) << ',' << format_number(c.gamma[l]) << '\n';
    }
}

} // namespace

ExperimentResult run_experiment(const RunConfig& cfg, const ExperimentOptions& options) {
    ExperimentResult result;
    const Dataset data = load_dataset(cfg.dataset);
    const std::vector<std::uint64_t> seeds =
        options.seed_override ? std::vector<std::uint64_t>{*options.seed_override} : cfg.seeds;

    const auto runs_dir = options.out_dir / "runs";
    std::filesystem::create_directories(runs_dir);

    for (const auto& reg : cfg.regularizers) {
        for (std::uint64_t seed : seeds) {
            RunResult run;
            run.regularizer = reg.label;
            run.seed = seed;
            run.dir = runs_dir / (sanitize_label(reg.label) + "_seed" + std::to_string(seed));
            try {
                std::filesystem::create_directories(run.dir);
                RunConfig local = cfg;
                local.training.failure_checkpoint = run.dir / "last_good.ckpt.json";
                std::filesystem::path dir = run.dir;
                run = run_single(local, data, reg, seed);
                run.dir = dir;
                write_history_csv(run.history, run.dir / "history.csv");
                write_history_jsonl(run.history, run.dir / "history.jsonl");
                write_trace_jsonl(run.history, run.dir / "trace.jsonl");
                if (options.write_checkpoints) {
                    if (run.final_network) save_checkpoint(*run.final_network, run.dir / "final.ckpt.json");
                    if (run.history.best) save_checkpoint(*run.history.best, run.dir / "best.ckpt.json");
                }
                if (!options.keep_networks) run.final_network.reset();
            } catch (const std::exception& e) {
                run.ok = false;
                run.error = e.what();
            }
            if (options.log) {
                if (run.ok)
                    *options.log << run.regularizer << " seed " << seed << ": test_acc "
                                 << format_number(run.test.accuracy) << " test_loss " << format_number(run.test.loss)
                                 << '\n';
                else
                    *options.log << run.regularizer << " seed " << seed << ": FAILED: " << run.error << '\n';
            }
            result.runs.push_back(std::move(run));
        }
    }

    result.summary = summarize(cfg, result.runs);
    if (options.write_summary) write_summary_csv(result.summary, options.out_dir / "summary.csv");
    if (options.write_condition_traces) write_condition_traces(result.runs, options.out_dir);
    return result;
}

} // namespace alrf
