#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <utility>

#include <json.hpp>

#include "beatmotion/errors.hpp"
#include "beatmotion/nn.hpp"
#include "beatmotion/optim.hpp"

namespace beatmotion::nn {

namespace detail {

inline nlohmann::ordered_json layer_to_json(const char* name, const DenseLayer& layer) {
    return {{"name", name},
            {"rows", layer.weights.rows},
            {"cols", layer.weights.cols},
            {"weights", layer.weights.data},
            {"biases", layer.biases},
            {"activation", activation_name(layer.activation)}};
}

inline DenseLayer layer_from_json(const nlohmann::json& j) {
    DenseLayer layer;
    const auto rows = j.at("rows").get<std::size_t>();
    const auto cols = j.at("cols").get<std::size_t>();
    layer.weights = Matrix(rows, cols);
    layer.weights.data = j.at("weights").get<Vec>();
    if (layer.weights.data.size() != rows * cols) {
        throw Error("model file: layer `" + j.at("name").get<std::string>() +
                    "` weight count does not match rows*cols");
    }
    layer.biases = j.at("biases").get<Vec>();
    if (layer.biases.size() != rows) {
        throw Error("model file: layer `" + j.at("name").get<std::string>() +
                    "` bias count does not match rows");
    }
    const std::string act = j.at("activation").get<std::string>();
    if (act == "tanh") {
        layer.activation = Activation::Tanh;
    } else if (act == "linear") {
        layer.activation = Activation::Linear;
    } else {
        throw Error("model file: unknown activation `" + act + "`");
    }
    if (!all_finite(layer.weights) || !all_finite(layer.biases)) {
        throw Error("model file: non-finite parameters");
    }
    return layer;
}

}  // namespace detail

inline nlohmann::ordered_json model_to_json(const VaeModel& model) {
    nlohmann::ordered_json doc;
    doc["input_dim"] = model.input_dim;
    doc["latent_dim"] = model.latent_dim;
    doc["layers"] = {detail::layer_to_json("encoder_hidden", model.encoder_hidden),
                     detail::layer_to_json("enc_mean", model.enc_mean),
                     detail::layer_to_json("enc_log_sigma", model.enc_log_sigma),
                     detail::layer_to_json("decoder_hidden", model.decoder_hidden),
                     detail::layer_to_json("decoder_out", model.decoder_out)};
    doc["prior"] = {{"mean", model.prior.mean}, {"std", model.prior.std}};
    doc["norm"] = {{"means", model.norm.means}, {"stds", model.norm.stds}};
    doc["epochs_trained"] = model.epochs_trained;
    doc["seed"] = model.seed;
    return doc;
}

inline VaeModel model_from_json(const nlohmann::json& doc) {
    VaeModel model;
    model.input_dim = doc.at("input_dim").get<std::size_t>();
    model.latent_dim = doc.at("latent_dim").get<std::size_t>();

    const auto& layers = doc.at("layers");
    if (!layers.is_array() || layers.size() != 5) {
        throw Error("model file: expected exactly five layers");
    }
    for (const auto& lj : layers) {
        const std::string name = lj.at("name").get<std::string>();
        DenseLayer layer = detail::layer_from_json(lj);
        if (name == "encoder_hidden") {
            model.encoder_hidden = std::move(layer);
        } else if (name == "enc_mean") {
            model.enc_mean = std::move(layer);
        } else if (name == "enc_log_sigma") {
            model.enc_log_sigma = std::move(layer);
        } else if (name == "decoder_hidden") {
            model.decoder_hidden = std::move(layer);
        } else if (name == "decoder_out") {
            model.decoder_out = std::move(layer);
        } else {
            throw Error("model file: unknown layer `" + name + "`");
        }
    }

    model.prior.mean = doc.at("prior").at("mean").get<double>();
    model.prior.std = doc.at("prior").at("std").get<double>();
    if (!(model.prior.std > 0.0)) throw Error("model file: prior std must be positive");
    model.norm.means = doc.at("norm").at("means").get<Vec>();
    model.norm.stds = doc.at("norm").at("stds").get<Vec>();
    model.epochs_trained = doc.at("epochs_trained").get<std::size_t>();
    model.seed = doc.at("seed").get<std::uint64_t>();

    if (model.enc_mean.out_dim() != model.latent_dim ||
        model.enc_log_sigma.out_dim() != model.latent_dim) {
        throw Error("model file: encoder heads do not match latent_dim");
    }
    if (model.decoder_out.out_dim() != model.input_dim ||
        model.encoder_hidden.in_dim() != model.input_dim) {
        throw Error("model file: input_dim does not match layer shapes");
    }
    if (model.norm.means.size() != model.input_dim || model.norm.stds.size() != model.input_dim) {
        throw Error("model file: norm stats do not match input_dim");
    }
    return model;
}

inline void save_model(const std::string& path, const VaeModel& model) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write model file: " + path);
    out << model_to_json(model).dump(2) << '\n';
}

inline VaeModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open model file: " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error("model file " + path + ": " + e.what());
    }
    try {
        return model_from_json(doc);
    } catch (const nlohmann::json::exception& e) {
        throw Error("model file " + path + ": " + e.what());
    }
}

// Checkpoints are model files with one extra "optim" object carrying the
// Adadelta accumulators, so an interrupted run can resume exactly.
// load_model accepts them too (the extra key is ignored).
inline void save_checkpoint(const std::string& path, const VaeModel& model,
                            const optim::AdadeltaState& state) {
    nlohmann::ordered_json doc = model_to_json(model);
    doc["optim"] = {{"gamma", state.gamma},
                    {"epsilon", state.epsilon},
                    {"avg_sq_grad", state.avg_sq_grad},
                    {"avg_sq_update", state.avg_sq_update}};
    std::ofstream out(path);
    if (!out) throw Error("cannot write checkpoint file: " + path);
    out << doc.dump(2) << '\n';
}

inline std::pair<VaeModel, optim::AdadeltaState> load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open checkpoint file: " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error("checkpoint file " + path + ": " + e.what());
    }
    VaeModel model = model_from_json(doc);
    if (!doc.contains("optim")) {
        throw Error("checkpoint file " + path + ": missing optimizer state");
    }
    optim::AdadeltaState state;
    state.gamma = doc["optim"].at("gamma").get<double>();
    state.epsilon = doc["optim"].at("epsilon").get<double>();
    state.avg_sq_grad = doc["optim"].at("avg_sq_grad").get<Vec>();
    state.avg_sq_update = doc["optim"].at("avg_sq_update").get<Vec>();
    if (state.avg_sq_grad.size() != model.param_count() ||
        state.avg_sq_update.size() != model.param_count()) {
        throw Error("checkpoint file " + path + ": optimizer state does not match parameter count");
    }
    return {std::move(model), std::move(state)};
}

}  // namespace beatmotion::nn
