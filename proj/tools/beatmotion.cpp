// beatmotion: music-driven robot choreography pipeline.
//
//   features  audio.wav -> features.json   (beats, loudness, variance)
//   capture   skeleton.jsonl + features.json -> poses.jsonl
//   dataset   poses.jsonl -> dataset.json
//   train     dataset.json -> model.json (+ checkpoints, loss log)
//   generate  model.json + audio.wav -> choreography.json
//   eval      checkpoints + audio.wav -> joint-variance report CSV

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "beatmotion/cli.hpp"

namespace cli = beatmotion::cli;

int main(int argc, char** argv) {
    CLI::App app{"music-driven robot choreography pipeline"};
    app.require_subcommand(1);

    std::string audio_path;
    std::string skeleton_path;
    std::string features_path;
    std::string poses_path;
    std::string dataset_path;
    std::string model_path;
    std::string out_path;
    std::vector<std::string> checkpoint_paths;
    std::string limits_path;
    std::string train_features_path;

    beatmotion::train::TrainConfig config;

    auto* features = app.add_subcommand("features", "extract beat and loudness features from a WAV clip");
    features->add_option("audio", audio_path, "input WAV file")->required();
    features->add_option("-o,--out", out_path, "output features.json")->required();

    auto* capture = app.add_subcommand("capture", "sample skeleton capture into robot poses on beats");
    capture->add_option("skeleton", skeleton_path, "skeleton JSONL capture")->required();
    capture->add_option("features", features_path, "features.json from the same clip")->required();
    capture->add_option("--limits", limits_path, "joint limits config");
    capture->add_option("-o,--out", out_path, "output pose JSONL")->required();

    auto* dataset = app.add_subcommand("dataset", "build a training dataset from beat-sampled poses");
    dataset->add_option("poses", poses_path, "pose JSONL from `capture`")->required();
    dataset->add_option("-o,--out", out_path, "output dataset.json")->required();

    auto* train = app.add_subcommand("train", "train the movement model");
    train->add_option("dataset", dataset_path, "dataset.json")->required();
    train->add_option("-o,--out", out_path, "output model.json")->required();
    train->add_option("--epochs", config.epochs, "training epochs");
    train->add_option("--batch", config.batch_size, "batch size");
    train->add_option("--seed", config.seed, "RNG seed");
    train->add_option("--checkpoint-every", config.checkpoint_every, "checkpoint interval in epochs");
    train->add_option("--features", train_features_path,
                      "features.json supplying the latent prior (mean loudness / mean variance)");

    auto* generate = app.add_subcommand("generate", "improvise a choreography for a clip");
    generate->add_option("model", model_path, "trained model.json")->required();
    generate->add_option("audio", audio_path, "input WAV file")->required();
    generate->add_option("--limits", limits_path, "joint limits config");
    generate->add_option("-o,--out", out_path, "output choreography.json")->required();

    auto* eval = app.add_subcommand("eval", "joint-variance report across checkpoints");
    eval->add_option("checkpoints", checkpoint_paths, "model/checkpoint files")->required();
    eval->add_option("--audio", audio_path, "evaluation WAV clip")->required();
    eval->add_option("--limits", limits_path, "joint limits config");
    eval->add_option("-o,--out", out_path, "output CSV report")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::kUsage;
    }

    const std::optional<std::string> limits =
        limits_path.empty() ? std::nullopt : std::make_optional(limits_path);

    if (features->parsed()) return cli::cmd_features(audio_path, out_path, std::cerr);
    if (capture->parsed()) {
        return cli::cmd_capture(skeleton_path, features_path, limits, out_path, std::cerr);
    }
    if (dataset->parsed()) return cli::cmd_dataset(poses_path, out_path, std::cerr);
    if (train->parsed()) {
        const std::optional<std::string> prior_features =
            train_features_path.empty() ? std::nullopt : std::make_optional(train_features_path);
        return cli::cmd_train(dataset_path, out_path, config, prior_features, std::cerr);
    }
    if (generate->parsed()) {
        return cli::cmd_generate(model_path, audio_path, limits, out_path, std::cerr);
    }
    if (eval->parsed()) {
        return cli::cmd_eval(checkpoint_paths, audio_path, limits, out_path, std::cerr);
    }
    return cli::kUsage;
}
