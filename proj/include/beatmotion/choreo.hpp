#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "beatmotion/audio_types.hpp"
#include "beatmotion/dataset.hpp"
#include "beatmotion/errors.hpp"
#include "beatmotion/nn.hpp"
#include "beatmotion/pose.hpp"

namespace beatmotion::choreo {

// Inverse CDF of the standard normal (Wichura's PPND16 rational
// approximations), accurate to ~1e-15 over (0, 1).
inline double probit(double u) {
    if (!(u > 0.0 && u < 1.0)) throw Error("probit: argument must lie strictly inside (0, 1)");

    const double q = u - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                  6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
              1.3314166789178437745e2) * r + 3.3871328727963666080e0);
        const double den =
            (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                  3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
              4.2313330701600911252e1) * r + 1.0);
        return q * num / den;
    }

    double r = (q < 0.0) ? u : 1.0 - u;
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
        value = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
        value = num / den;
    }
    return (q < 0.0) ? -value : value;
}

// Latent coordinates for one segment: the default two-unit layout maps
// loudness to unit 0 and variance to unit 1.
struct LatentPoint {
    Vec z;
};

// Rank each feature in the clip's own empirical CDF, clamp the rank away
// from {0, 1}, push it through the inverse Gaussian CDF and scale into the
// model's latent prior. The median segment lands on the latent center.
inline LatentPoint features_to_latent(const audio::SegmentFeatures& seg,
                                      const audio::FeatureSummary& summary,
                                      const nn::GaussianPrior& prior) {
    if (summary.loudness_sorted.empty() || summary.variance_sorted.empty()) {
        throw Error("features_to_latent: empty feature summary");
    }
    constexpr double kClamp = 1e-3;
    const double u_loud =
        std::clamp(audio::empirical_cdf(summary.loudness_sorted, seg.loudness_db), kClamp, 1.0 - kClamp);
    const double u_var =
        std::clamp(audio::empirical_cdf(summary.variance_sorted, seg.variance), kClamp, 1.0 - kClamp);
    return LatentPoint{Vec{prior.mean + prior.std * probit(u_loud),
                           prior.mean + prior.std * probit(u_var)}};
}

struct Choreography {
    struct Move {
        double t_start = 0.0;
        double t_end = 0.0;
        dataset::Movement movement;
    };

    std::vector<Move> moves;
    double source_bpm = 0.0;
};

// Decode one movement per inter-beat segment. Inference is deterministic:
// the latent point comes entirely from the music features, with no
// sampling noise.
inline Choreography generate_sequence(const nn::VaeModel& model,
                                      const std::vector<audio::SegmentFeatures>& features,
                                      const audio::FeatureSummary& summary,
                                      const audio::BeatGrid& grid,
                                      const mocap::JointLimits& limits) {
    if (model.epochs_trained == 0) throw Error("generate_sequence: model has not been trained");
    if (model.latent_dim != 2) {
        throw Error("generate_sequence: music-feature injection needs a 2-unit latent space");
    }
    if (model.input_dim != dataset::kMovementDims) {
        throw Error("generate_sequence: model input_dim does not match 10-joint pose couples");
    }
    if (features.size() != grid.intervals.size()) {
        throw Error("generate_sequence: feature count (" + std::to_string(features.size()) +
                    ") does not match beat interval count (" + std::to_string(grid.intervals.size()) +
                    ")");
    }

    Choreography out;
    out.source_bpm = grid.bpm;
    out.moves.reserve(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        const LatentPoint z = features_to_latent(features[i], summary, model.prior);
        const Vec raw = nn::decode(model, z.z);
        const Vec denorm = model.norm.invert(raw);
        dataset::Movement movement = dataset::Movement::from_vector(denorm);
        movement.pose_a = mocap::clamp_pose(movement.pose_a, limits);
        movement.pose_b = mocap::clamp_pose(movement.pose_b, limits);
        out.moves.push_back(Choreography::Move{grid.beats[i], grid.beats[i + 1], movement});
    }
    return out;
}

// True iff every move occupies exactly its beat interval.
inline bool schedule_check(const Choreography& c, const audio::BeatGrid& grid) {
    if (c.moves.size() != grid.intervals.size()) return false;
    for (std::size_t i = 0; i < c.moves.size(); ++i) {
        if (c.moves[i].t_start != grid.beats[i] || c.moves[i].t_end != grid.beats[i + 1]) {
            return false;
        }
    }
    return true;
}

// ---- choreography.json ----
// {"source_audio", "bpm", "joint_order", "moves": [{t_start, t_end,
//   pose_a: {name: rad}, pose_b: {name: rad}}]}

inline nlohmann::ordered_json choreography_to_json(const Choreography& c,
                                                   const std::string& source_audio) {
    nlohmann::ordered_json doc;
    doc["source_audio"] = source_audio;
    doc["bpm"] = c.source_bpm;
    doc["joint_order"] = mocap::kJointNames;
    nlohmann::ordered_json moves = nlohmann::ordered_json::array();
    for (const Choreography::Move& m : c.moves) {
        nlohmann::ordered_json pose_a;
        nlohmann::ordered_json pose_b;
        for (std::size_t i = 0; i < mocap::kJointCount; ++i) {
            pose_a[mocap::kJointNames[i]] = m.movement.pose_a.angles[i];
            pose_b[mocap::kJointNames[i]] = m.movement.pose_b.angles[i];
        }
        moves.push_back({{"t_start", m.t_start},
                         {"t_end", m.t_end},
                         {"pose_a", std::move(pose_a)},
                         {"pose_b", std::move(pose_b)}});
    }
    doc["moves"] = std::move(moves);
    return doc;
}

inline Choreography choreography_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("moves") || !doc.contains("bpm")) {
        throw Error("choreography file: expected {source_audio, bpm, joint_order, moves}");
    }
    Choreography c;
    c.source_bpm = doc["bpm"].get<double>();
    for (const auto& m : doc["moves"]) {
        Choreography::Move move;
        move.t_start = m.at("t_start").get<double>();
        move.t_end = m.at("t_end").get<double>();
        for (std::size_t i = 0; i < mocap::kJointCount; ++i) {
            move.movement.pose_a.angles[i] = m.at("pose_a").at(mocap::kJointNames[i]).get<double>();
            move.movement.pose_b.angles[i] = m.at("pose_b").at(mocap::kJointNames[i]).get<double>();
        }
        c.moves.push_back(move);
    }
    return c;
}

inline void save_choreography(const std::string& path, const Choreography& c,
                              const std::string& source_audio) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write choreography file: " + path);
    out << choreography_to_json(c, source_audio).dump(2) << '\n';
}

inline Choreography load_choreography(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open choreography file: " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error("choreography file " + path + ": " + e.what());
    }
    return choreography_from_json(doc);
}

}  // namespace beatmotion::choreo
