#include "alrf/checkpoint.hpp"

#include "alrf/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace alrf {

using nlohmann::json;

namespace {

json tensor_json(const Tensor& t) {
    return json{{"shape", t.shape()}, {"data", std::vector<double>(t.values().begin(), t.values().end())}};
}

Tensor tensor_from_json(const json& j) {
    return Tensor(j.at("shape").get<Tensor::Shape>(), j.at("data").get<std::vector<double>>());
}

} // namespace

std::string checkpoint_to_string(const Network& net) {
    json layers = json::array();
    for (std::size_t i = 0; i < net.layer_count(); ++i) {
        const LayerSpec& s = net.spec(i);
        json l{{"index", i}, {"kind", to_string(s.kind)}, {"activation", to_string(s.activation)}};
        if (s.kind == LayerKind::dense) {
            l["fan_in"] = s.fan_in;
            l["fan_out"] = s.fan_out;
        } else if (s.kind == LayerKind::conv2d) {
            l["kh"] = s.kh;
            l["kw"] = s.kw;
            l["cin"] = s.cin;
            l["cout"] = s.cout;
            l["stride"] = s.stride;
        }
        if (s.trainable()) {
            l["weights"] = tensor_json(net.state(i).weights);
            l["bias"] = tensor_json(net.state(i).bias);
        }
        layers.push_back(std::move(l));
    }
    json doc{{"format", "alrf-checkpoint"},
             {"version", kCheckpointVersion},
             {"input_shape", net.input_shape()},
             {"loss", to_string(net.loss_kind())},
             {"layers", std::move(layers)}};
    return doc.dump(1);
}

Network checkpoint_from_string(const std::string& text) {
    try {
        const json doc = json::parse(text);
        if (doc.at("format") != "alrf-checkpoint") throw DomainError("not an alrf checkpoint");
        if (doc.at("version").get<int>() != kCheckpointVersion) throw DomainError("unsupported checkpoint version");
        Network net(doc.at("input_shape").get<Tensor::Shape>(), parse_loss_kind(doc.at("loss")));
        for (const json& l : doc.at("layers")) {
            const LayerKind kind = parse_layer_kind(l.at("kind"));
            const Activation act = parse_activation(l.at("activation"));
            LayerSpec s;
            switch (kind) {
            case LayerKind::dense: s = LayerSpec::dense(l.at("fan_in"), l.at("fan_out"), act); break;
            case LayerKind::conv2d:
                s = LayerSpec::conv2d(l.at("kh"), l.at("kw"), l.at("cin"), l.at("cout"), l.at("stride"), act);
                break;
            case LayerKind::activation: s = LayerSpec::activation_layer(act); break;
            case LayerKind::flatten: s = LayerSpec::flatten(); break;
            }
            net.add(s);
            if (s.trainable()) {
                LayerState& st = net.state(net.layer_count() - 1);
                Tensor w = tensor_from_json(l.at("weights"));
                Tensor b = tensor_from_json(l.at("bias"));
                require_same_shape(w, st.weights, "checkpoint weights");
                require_same_shape(b, st.bias, "checkpoint bias");
                st.weights = std::move(w);
                st.bias = std::move(b);
            }
        }
        return net;
    } catch (const json::exception& e) {
        throw DomainError(std::string("malformed checkpoint: ") + e.what());
    }
}

void save_checkpoint(const Network& net, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write checkpoint " + path.string());
    out << checkpoint_to_string(net) << '\n';
}

Network load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read checkpoint " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return checkpoint_from_string(ss.str());
}

} // namespace alrf
