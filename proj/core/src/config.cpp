#include "alrf/config.hpp"

#include "alrf/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace alrf {

using nlohmann::json;

std::string to_string(RegularizerKind k) {
    switch (k) {
    case RegularizerKind::none: return "none";
    case RegularizerKind::dropout: return "dropout";
    case RegularizerKind::weight_decay: return "weight_decay";
    case RegularizerKind::adaptive_lrf: return "adaptive_lrf";
    case RegularizerKind::lrf_penalty: return "lrf_penalty";
    }
    return "?";
}

namespace {

// Field accessors that report the full path of whatever is wrong.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

    const std::string& path() const { return path_; }
    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string& key) const { return j_.contains(key); }

    Reader child(const std::string& key) const {
        if (!j_.contains(key) || !j_.at(key).is_object()) throw ConfigError(field(key), "expected an object");
        return Reader(j_.at(key), field(key));
    }

    template <typename T>
    T get(const std::string& key, T fallback) const {
        if (!j_.contains(key)) return fallback;
        return as<T>(key);
    }

    template <typename T>
    T require(const std::string& key) const {
        if (!j_.contains(key)) throw ConfigError(field(key), "missing required field");
        return as<T>(key);
    }

    const json& raw() const { return j_; }

private:
    template <typename T>
    T as(const std::string& key) const {
        try {
            return j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(field(key), "has the wrong type");
        }
    }

    const json& j_;
    std::string path_;
};

std::string format_param(double v) {
    std::ostringstream ss;
    ss << v;
    return ss.str();
}

Regularizer parse_regularizer(const Reader& r) {
    Regularizer reg;
    const std::string name = r.require<std::string>("name");
    if (name == "none") {
        reg.kind = RegularizerKind::none;
        reg.label = "none";
    } else if (name == "dropout") {
        reg.kind = RegularizerKind::dropout;
        reg.dropout = r.require<double>("p");
        if (!(reg.dropout > 0.0 && reg.dropout < 1.0)) throw ConfigError(r.field("p"), "must lie in (0, 1)");
        reg.label = "dropout(" + format_param(reg.dropout) + ")";
    } else if (name == "weight_decay") {
        reg.kind = RegularizerKind::weight_decay;
        reg.weight_decay = r.require<double>("lambda");
        if (!(reg.weight_decay >= 0.0)) throw ConfigError(r.field("lambda"), "must be nonnegative");
        reg.label = "weight_decay(" + format_param(reg.weight_decay) + ")";
    } else if (name == "adaptive_lrf") {
        reg.kind = RegularizerKind::adaptive_lrf;
        ControllerConfig& c = reg.adaptive;
        if (r.has("tau") && r.raw().at("tau").is_string()) {
            if (r.raw().at("tau") != "inf") throw ConfigError(r.field("tau"), "must be a number or \"inf\"");
            c.tau = std::numeric_limits<double>::infinity();
        } else {
            c.tau = r.get<double>("tau", c.tau);
        }
        c.patience = r.get<std::size_t>("patience", c.patience);
        if (c.patience == 0) throw ConfigError(r.field("patience"), "must be at least 1");
        try {
            c.strategy.kind = parse_strategy(r.get<std::string>("strategy", "adaptive_random"));
        } catch (const DomainError& e) {
            throw ConfigError(r.field("strategy"), e.what());
        }
        c.strategy.count = r.get<std::size_t>("k", 1);
        const std::string mode = r.get<std::string>("mode", "tensor");
        if (mode == "tensor") c.mode = SimplifyMode::tensor;
        else if (mode == "matrix") c.mode = SimplifyMode::matrix;
        else throw ConfigError(r.field("mode"), "must be \"matrix\" or \"tensor\"");
        c.reset_moments = r.get<bool>("reset_moments", true);
        reg.label = c.strategy.kind == StrategyKind::adaptive_random
                        ? std::string("adaptive_lrf")
                        : "adaptive_lrf[" + to_string(c.strategy.kind) + "=" + std::to_string(c.strategy.count) + "]";
    } else if (name == "lrf_penalty") {
        reg.kind = RegularizerKind::lrf_penalty;
        reg.gamma = r.get<double>("gamma", 1.0);
        if (!(reg.gamma >= 0.0)) throw ConfigError(r.field("gamma"), "must be nonnegative");
        reg.label = "lrf_penalty(" + format_param(reg.gamma) + ")";
    } else {
        throw ConfigError(r.field("name"), "unknown regularizer '" + name + "'");
    }
    reg.label = r.get<std::string>("label", reg.label);
    if (r.has("with")) {
        const json& with = r.raw().at("with");
        if (!with.is_array()) throw ConfigError(r.field("with"), "expected an array");
        for (std::size_t i = 0; i < with.size(); ++i)
            reg.with.push_back(parse_regularizer(Reader(with[i], r.field("with") + "[" + std::to_string(i) + "]")));
    }
    return reg;
}

LayerSpec parse_layer(const Reader& r) {
    const std::string kind = r.require<std::string>("kind");
    Activation act = Activation::none;
    try {
        act = parse_activation(r.get<std::string>("activation", "none"));
    } catch (const DomainError& e) {
        throw ConfigError(r.field("activation"), e.what());
    }
    if (kind == "dense") return LayerSpec::dense(r.require<std::size_t>("fan_in"), r.require<std::size_t>("fan_out"), act);
    if (kind == "conv2d")
        return LayerSpec::conv2d(r.require<std::size_t>("kh"), r.require<std::size_t>("kw"),
                                 r.require<std::size_t>("cin"), r.require<std::size_t>("cout"),
                                 r.get<std::size_t>("stride", 1), act);
    if (kind == "activation") return LayerSpec::activation_layer(act);
    if (kind == "flatten") return LayerSpec::flatten();
    throw ConfigError(r.field("kind"), "unknown layer kind '" + kind + "'");
}

} // namespace

RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("<root>", "expected an object");
    const Reader root(doc, "");
    RunConfig cfg;

    cfg.schema_version = root.require<int>("schema_version");
    if (cfg.schema_version != kConfigSchemaVersion)
        throw ConfigError("schema_version", "unsupported version " + std::to_string(cfg.schema_version));

    {
        const Reader d = root.child("dataset");
        const std::string source = d.require<std::string>("source");
        if (source == "synthetic") {
            cfg.dataset.source = DatasetConfig::Source::synthetic;
            cfg.dataset.samples = d.get<std::size_t>("n", cfg.dataset.samples);
            cfg.dataset.noise = d.get<double>("noise", cfg.dataset.noise);
            cfg.dataset.seed = d.get<std::uint64_t>("seed", 0);
            if (cfg.dataset.samples < 10) throw ConfigError(d.field("n"), "must be at least 10");
            if (!(cfg.dataset.noise >= 0.0 && cfg.dataset.noise < 0.5))
                throw ConfigError(d.field("noise"), "must lie in [0, 0.5)");
        } else if (source == "csv") {
            cfg.dataset.source = DatasetConfig::Source::csv;
            std::filesystem::path p = d.require<std::string>("path");
            cfg.dataset.path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
            cfg.dataset.label_column = d.get<std::string>("label_column", "label");
            cfg.dataset.normalize = d.get<bool>("normalize", true);
        } else {
            throw ConfigError(d.field("source"), "must be \"synthetic\" or \"csv\"");
        }
    }

    if (root.has("splits")) {
        const Reader s = root.child("splits");
        cfg.split_train = s.require<double>("train");
        cfg.split_validation = s.require<double>("validation");
        cfg.split_test = s.require<double>("test");
        if (!(cfg.split_train > 0 && cfg.split_validation > 0 && cfg.split_test > 0))
            throw ConfigError("splits", "every fraction must be positive");
        if (std::abs(cfg.split_train + cfg.split_validation + cfg.split_test - 1.0) > 1e-9)
            throw ConfigError("splits", "fractions must sum to 1");
    }

    if (root.has("network")) {
        const Reader n = root.child("network");
        try {
            cfg.network.loss = parse_loss_kind(n.get<std::string>("loss", "cross_entropy"));
        } catch (const DomainError& e) {
            throw ConfigError(n.field("loss"), e.what());
        }
        if (n.has("layers")) {
            cfg.network.input_shape = n.require<Tensor::Shape>("input_shape");
            const json& layers = n.raw().at("layers");
            if (!layers.is_array() || layers.empty()) throw ConfigError(n.field("layers"), "expected a non-empty array");
            for (std::size_t i = 0; i < layers.size(); ++i)
                cfg.network.layers.push_back(parse_layer(Reader(layers[i], n.field("layers") + "[" + std::to_string(i) + "]")));
        } else {
            cfg.network.hidden = n.get<std::vector<std::size_t>>("hidden", cfg.network.hidden);
            for (auto h : cfg.network.hidden)
                if (h == 0) throw ConfigError(n.field("hidden"), "layer widths must be positive");
            try {
                cfg.network.activation = parse_activation(n.get<std::string>("activation", "relu"));
                cfg.network.output_activation = parse_activation(n.get<std::string>("output_activation", "softmax"));
            } catch (const DomainError& e) {
                throw ConfigError(n.field("activation"), e.what());
            }
        }
    }

    if (root.has("training")) {
        const Reader t = root.child("training");
        TrainConfig& tc = cfg.training;
        tc.epochs = t.get<std::size_t>("epochs", tc.epochs);
        tc.batch_size = t.get<std::size_t>("batch_size", tc.batch_size);
        if (tc.batch_size == 0) throw ConfigError(t.field("batch_size"), "must be positive");
        tc.adam.lr = t.get<double>("lr", tc.adam.lr);
        tc.adam.beta1 = t.get<double>("beta1", tc.adam.beta1);
        tc.adam.beta2 = t.get<double>("beta2", tc.adam.beta2);
        tc.adam.eps = t.get<double>("eps", tc.adam.eps);
        tc.probe_size = t.get<std::size_t>("probe_size", tc.probe_size);
        if (tc.probe_size == 0) throw ConfigError(t.field("probe_size"), "must be positive");
        tc.track_conditions = t.get<bool>("track_conditions", tc.track_conditions);
        tc.early_stop_patience = t.get<std::size_t>("early_stop_patience", 0);
    }

    if (root.has("seeds")) {
        cfg.seeds = root.require<std::vector<std::uint64_t>>("seeds");
        if (cfg.seeds.empty()) throw ConfigError("seeds", "must list at least one seed");
    }

    cfg.allow_combinations = root.get<bool>("allow_combinations", false);
    if (!root.has("regularizers")) throw ConfigError("regularizers", "missing required field");
    const json& regs = doc.at("regularizers");
    if (!regs.is_array() || regs.empty()) throw ConfigError("regularizers", "expected a non-empty array");
    for (std::size_t i = 0; i < regs.size(); ++i) {
        const std::string path = "regularizers[" + std::to_string(i) + "]";
        if (!regs[i].is_object()) throw ConfigError(path, "expected an object");
        Regularizer reg = parse_regularizer(Reader(regs[i], path));
        if (!reg.with.empty() && !cfg.allow_combinations)
            throw ConfigError(path + ".with", "combined regularizers require allow_combinations");
        cfg.regularizers.push_back(std::move(reg));
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), path.parent_path());
}

Network build_network(const NetworkConfig& cfg, std::size_t input_features, std::size_t classes) {
    if (!cfg.layers.empty()) {
        Network net(cfg.input_shape, cfg.loss);
        for (const auto& l : cfg.layers) net.add(l);
        return net;
    }
    Network net({input_features}, cfg.loss);
    std::size_t width = input_features;
    for (auto h : cfg.hidden) {
        net.add(LayerSpec::dense(width, h, cfg.activation));
        width = h;
    }
    net.add(LayerSpec::dense(width, classes, cfg.output_activation));
    return net;
}

namespace {

void apply_regularizer(TrainConfig& tc, const Regularizer& reg) {
    switch (reg.kind) {
    case RegularizerKind::none: break;
    case RegularizerKind::dropout: tc.dropout = reg.dropout; break;
    case RegularizerKind::weight_decay: tc.weight_decay = reg.weight_decay; break;
    case RegularizerKind::adaptive_lrf: tc.adaptive = reg.adaptive; break;
    case RegularizerKind::lrf_penalty: tc.penalty_gamma = reg.gamma; break;
    }
}

} // namespace

TrainConfig train_config_for(const RunConfig& cfg, const Regularizer& reg, std::uint64_t seed) {
    TrainConfig tc = cfg.training;
    tc.seed = seed;
    apply_regularizer(tc, reg);
    if (cfg.allow_combinations)
        for (const auto& extra : reg.with) apply_regularizer(tc, extra);
    return tc;
}

} // namespace alrf
