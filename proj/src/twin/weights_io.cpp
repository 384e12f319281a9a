#include "viltwin/twin/weights_io.hpp"

#include <fstream>
#include <string>

#include "viltwin/core/error.hpp"
#include "viltwin/core/json_text.hpp"

namespace viltwin::twin {

using nlohmann::json;

namespace {

constexpr int kVersion = 1;

json tensor_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

json tensor_to_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ValidationError(where + ": expected a number");
    return j.get<double>();
}

void tensor_from_json(const json& j, Matrix& m, const std::string& name) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != m.rows()) {
        throw ValidationError("layers." + name + ": expected " + std::to_string(m.rows()) + " rows");
    }
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        const json& row = j[r];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m.cols()) {
            throw ValidationError("layers." + name + "[" + std::to_string(r) + "]: expected " +
                                  std::to_string(m.cols()) + " columns");
        }
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = number(row[c], "layers." + name);
    }
}

void tensor_from_json(const json& j, Vector& v, const std::string& name) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != v.size()) {
        throw ValidationError("layers." + name + ": expected " + std::to_string(v.size()) + " values");
    }
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = number(j[i], "layers." + name);
}

int int_field(const json& obj, const char* key) {
    if (!obj.contains(key) || !obj[key].is_number_integer()) {
        throw ValidationError(std::string("config.") + key + ": expected an integer");
    }
    return obj[key].get<int>();
}

}  // namespace

json weights_to_json(const TwinNetwork& net) {
    json doc;
    doc["version"] = kVersion;
    doc["config"] = {{"window", net.shape.window},
                     {"encoder_hidden", net.shape.encoder_hidden},
                     {"latent", net.shape.latent},
                     {"decoder_hidden", net.shape.decoder_hidden}};
    doc["normalizer"] = {{"mean", {net.normalizer.mean[0], net.normalizer.mean[1]}},
                         {"std", {net.normalizer.std[0], net.normalizer.std[1]}}};
    json layers = json::object();
    TwinParams::visit(net.params, [&](const std::string& name, const auto& t) { layers[name] = tensor_to_json(t); });
    doc["layers"] = std::move(layers);
    return doc;
}

TwinNetwork weights_from_json(const json& doc) {
    if (!doc.is_object()) throw ValidationError("weights file must hold a JSON object");
    if (!doc.contains("version") || doc["version"] != kVersion) {
        throw ValidationError("version: unsupported weights version");
    }
    if (!doc.contains("config") || !doc["config"].is_object()) throw ValidationError("config: missing");
    const json& cfg = doc["config"];
    NetworkShape shape{int_field(cfg, "window"), int_field(cfg, "encoder_hidden"), int_field(cfg, "latent"),
                       int_field(cfg, "decoder_hidden")};
    TwinNetwork net = TwinNetwork::zeros(shape);

    if (!doc.contains("normalizer") || !doc["normalizer"].is_object()) throw ValidationError("normalizer: missing");
    const json& norm = doc["normalizer"];
    for (const char* key : {"mean", "std"}) {
        if (!norm.contains(key) || !norm[key].is_array() || norm[key].size() != 2) {
            throw ValidationError(std::string("normalizer.") + key + ": expected two numbers");
        }
    }
    for (int ch = 0; ch < 2; ++ch) {
        net.normalizer.mean[ch] = number(norm["mean"][ch], "normalizer.mean");
        net.normalizer.std[ch] = number(norm["std"][ch], "normalizer.std");
    }

    if (!doc.contains("layers") || !doc["layers"].is_object()) throw ValidationError("layers: missing");
    const json& layers = doc["layers"];
    TwinParams::visit(net.params, [&](const std::string& name, auto& t) {
        if (!layers.contains(name)) throw ValidationError("layers." + name + ": missing");
        tensor_from_json(layers[name], t, name);
    });
    net.validate();
    return net;
}

void save_weights(const TwinNetwork& net, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write weights to " + path.string());
    out << to_json_line(weights_to_json(net)) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

TwinNetwork load_weights(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open weights file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return weights_from_json(doc);
}

}  // namespace viltwin::twin
