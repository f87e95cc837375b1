#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "beatmotion/audio.hpp"
#include "beatmotion/choreo.hpp"
#include "beatmotion/dataset.hpp"
#include "beatmotion/mocap.hpp"
#include "beatmotion/model_io.hpp"
#include "beatmotion/train.hpp"
#include "beatmotion/wav.hpp"

// Command implementations behind the `beatmotion` binary. Each takes paths
// plus a diagnostics stream and returns the process exit code: 0 success,
// 1 domain/input error (the binary itself maps usage errors to 2). Data
// goes only to files; diagnostics only to `err`.

namespace beatmotion::cli {

inline constexpr int kOk = 0;
inline constexpr int kError = 1;
inline constexpr int kUsage = 2;

// Shortest decimal that round-trips the exact double, for CSV output.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline mocap::JointLimits resolve_limits(const std::optional<std::string>& limits_path) {
    return limits_path ? mocap::load_limits(*limits_path) : mocap::default_limits();
}

inline int cmd_features(const std::string& audio_path, const std::string& out_path,
                        std::ostream& err) {
    try {
        const audio::PcmSignal signal = audio::load_wav(audio_path);
        const audio::AudioFeatures features = audio::analyze_features(signal);
        audio::save_features(out_path, features);
        return kOk;
    } catch (const Error& e) {
        err << "beatmotion features: " << e.what() << '\n';
        return kError;
    }
}

inline int cmd_capture(const std::string& skeleton_path, const std::string& features_path,
                       const std::optional<std::string>& limits_path, const std::string& out_path,
                       std::ostream& err) {
    try {
        const std::vector<mocap::SkeletonFrame> frames = mocap::load_skeleton(skeleton_path);
        const audio::AudioFeatures features = audio::load_features(features_path);
        const mocap::JointLimits limits = resolve_limits(limits_path);
        const std::vector<mocap::TimedPose> poses =
            mocap::sample_on_beats(frames, features.grid, limits);
        std::ofstream out(out_path);
        if (!out) throw Error("cannot write pose file: " + out_path);
        mocap::write_poses(out, poses);
        return kOk;
    } catch (const Error& e) {
        err << "beatmotion capture: " << e.what() << '\n';
        return kError;
    }
}

inline int cmd_dataset(const std::string& poses_path, const std::string& out_path,
                       std::ostream& err) {
    try {
        const std::vector<mocap::TimedPose> timed = mocap::load_poses(poses_path);
        std::vector<mocap::RobotPose> poses;
        poses.reserve(timed.size());
        for (const mocap::TimedPose& tp : timed) poses.push_back(tp.pose);
        const std::vector<dataset::Movement> movements = dataset::build_movements(poses);
        const dataset::TrainingSet pairs = dataset::make_training_pairs(movements);
        const dataset::TrainingSet normalized = dataset::normalize(pairs);
        dataset::save_dataset(out_path, movements, normalized.norm);
        return kOk;
    } catch (const Error& e) {
        err << "beatmotion dataset: " << e.what() << '\n';
        return kError;
    }
}

// Checkpoints land next to the output model as <stem>.epochNNN.json; the
// per-epoch loss log lands at <stem>.loss.csv.
inline std::string checkpoint_path(const std::string& model_path, std::size_t epoch) {
    std::string stem = model_path;
    if (stem.size() > 5 && stem.substr(stem.size() - 5) == ".json") {
        stem.resize(stem.size() - 5);
    }
    char suffix[32];
    std::snprintf(suffix, sizeof(suffix), ".epoch%03zu.json", epoch);
    return stem + suffix;
}

inline std::string loss_log_path(const std::string& model_path) {
    std::string stem = model_path;
    if (stem.size() > 5 && stem.substr(stem.size() - 5) == ".json") {
        stem.resize(stem.size() - 5);
    }
    return stem + ".loss.csv";
}

inline int cmd_train(const std::string& dataset_path, const std::string& out_model_path,
                     const train::TrainConfig& config,
                     const std::optional<std::string>& features_path, std::ostream& err) {
    try {
        const dataset::DatasetFile file = dataset::load_dataset(dataset_path);
        const dataset::TrainingSet pairs = dataset::make_training_pairs(file.movements);
        const dataset::TrainingSet normalized = dataset::apply_norm(pairs, file.norm);

        nn::GaussianPrior prior;
        if (features_path) {
            const audio::AudioFeatures features = audio::load_features(*features_path);
            prior.mean = features.summary.loudness_mean;
            prior.std = std::max(features.summary.variance_mean, 1e-6);
        }

        std::ofstream loss_out(loss_log_path(out_model_path));
        if (!loss_out) throw Error("cannot write loss log: " + loss_log_path(out_model_path));
        loss_out << "epoch,reconstruction,kl,total\n";

        std::vector<train::EpochLoss> log;
        std::size_t flushed = 0;
        auto flush_log = [&]() {
            for (; flushed < log.size(); ++flushed) {
                const train::EpochLoss& e = log[flushed];
                loss_out << e.epoch << ',' << format_double(e.reconstruction) << ','
                         << format_double(e.kl) << ',' << format_double(e.total) << '\n';
            }
            loss_out.flush();
        };
        const nn::VaeModel model = train::train_vae(
            normalized, prior, config, &log,
            [&](const nn::VaeModel& m, const optim::AdadeltaState& state) {
                nn::save_checkpoint(checkpoint_path(out_model_path, m.epochs_trained), m, state);
                flush_log();
            });
        flush_log();
        nn::save_model(out_model_path, model);
        return kOk;
    } catch (const Error& e) {
        err << "beatmotion train: " << e.what() << '\n';
        return kError;
    }
}

inline int cmd_generate(const std::string& model_path, const std::string& audio_path,
                        const std::optional<std::string>& limits_path, const std::string& out_path,
                        std::ostream& err) {
    try {
        const nn::VaeModel model = nn::load_model(model_path);
        const audio::PcmSignal signal = audio::load_wav(audio_path);
        const audio::AudioFeatures features = audio::analyze_features(signal);
        const mocap::JointLimits limits = resolve_limits(limits_path);
        const choreo::Choreography dance =
            choreo::generate_sequence(model, features.segments, features.summary, features.grid, limits);
        choreo::save_choreography(out_path, dance, audio_path);
        return kOk;
    } catch (const Error& e) {
        err << "beatmotion generate: " << e.what() << '\n';
        return kError;
    }
}

// One CSV column per checkpoint (labelled by its trained epochs), one row
// per joint in canonical order, plus a final `mean` row.
inline int cmd_eval(const std::vector<std::string>& checkpoint_paths, const std::string& audio_path,
                    const std::optional<std::string>& limits_path, const std::string& out_csv,
                    std::ostream& err) {
    try {
        if (checkpoint_paths.empty()) throw Error("eval: need at least one checkpoint");
        const audio::PcmSignal signal = audio::load_wav(audio_path);
        const audio::AudioFeatures features = audio::analyze_features(signal);
        const mocap::JointLimits limits = resolve_limits(limits_path);

        std::vector<std::string> labels;
        std::vector<std::array<double, mocap::kJointCount>> columns;
        for (const std::string& path : checkpoint_paths) {
            const nn::VaeModel model = nn::load_model(path);
            const choreo::Choreography dance = choreo::generate_sequence(
                model, features.segments, features.summary, features.grid, limits);
            std::vector<mocap::RobotPose> poses;
            poses.reserve(dance.moves.size() * 2);
            for (const choreo::Choreography::Move& m : dance.moves) {
                poses.push_back(m.movement.pose_a);
                poses.push_back(m.movement.pose_b);
            }
            labels.push_back("epoch_" + std::to_string(model.epochs_trained));
            columns.push_back(dataset::joint_variance(poses));
        }

        std::ofstream out(out_csv);
        if (!out) throw Error("cannot write report: " + out_csv);
        out << "joint";
        for (const std::string& label : labels) out << ',' << label;
        out << '\n';
        for (std::size_t j = 0; j < mocap::kJointCount; ++j) {
            out << mocap::kJointNames[j];
            for (const auto& col : columns) out << ',' << format_double(col[j]);
            out << '\n';
        }
        out << "mean";
        for (const auto& col : columns) out << ',' << format_double(dataset::mean_variance(col));
        out << '\n';
        return kOk;
    } catch (const Error& e) {
        err << "beatmotion eval: " << e.what() << '\n';
        return kError;
    }
}

}  // namespace beatmotion::cli
