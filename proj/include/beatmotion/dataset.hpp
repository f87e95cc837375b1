#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "beatmotion/linalg.hpp"
#include "beatmotion/norm.hpp"
#include "beatmotion/pose.hpp"

namespace beatmotion::dataset {

inline constexpr std::size_t kMovementDims = 2 * mocap::kJointCount;

// An ordered couple of poses: the unit the network consumes and produces.
struct Movement {
    mocap::RobotPose pose_a;
    mocap::RobotPose pose_b;

    bool operator==(const Movement&) const = default;

    // pose_a's joints in canonical order, then pose_b's
    Vec as_vector() const {
        Vec v(kMovementDims);
        for (std::size_t i = 0; i < mocap::kJointCount; ++i) {
            v[i] = pose_a.angles[i];
            v[mocap::kJointCount + i] = pose_b.angles[i];
        }
        return v;
    }

    static Movement from_vector(const Vec& v) {
        require_length(v, kMovementDims, "Movement::from_vector");
        Movement m;
        for (std::size_t i = 0; i < mocap::kJointCount; ++i) {
            m.pose_a.angles[i] = v[i];
            m.pose_b.angles[i] = v[mocap::kJointCount + i];
        }
        return m;
    }
};

// Consecutive non-overlapping couples: (p0,p1), (p2,p3), ... A trailing
// unpaired pose is dropped, so k poses give floor(k/2) movements.
inline std::vector<Movement> build_movements(const std::vector<mocap::RobotPose>& poses) {
    if (poses.size() < 2) throw Error("build_movements: need at least two poses");
    std::vector<Movement> out;
    out.reserve(poses.size() / 2);
    for (std::size_t i = 0; i + 1 < poses.size(); i += 2) {
        out.push_back(Movement{poses[i], poses[i + 1]});
    }
    return out;
}

struct TrainingSet {
    std::vector<Vec> inputs;   // movement vectors, M1
    std::vector<Vec> targets;  // M1 shifted forward one step, M2
    NormStats norm;
};

// inputs = movements[0..n-1), targets = movements[1..n): the target of each
// pair is the next movement in time.
inline TrainingSet make_training_pairs(const std::vector<Movement>& movements) {
    if (movements.size() < 2) throw Error("make_training_pairs: need at least two movements");
    TrainingSet set;
    set.inputs.reserve(movements.size() - 1);
    set.targets.reserve(movements.size() - 1);
    for (std::size_t i = 0; i + 1 < movements.size(); ++i) {
        set.inputs.push_back(movements[i].as_vector());
        set.targets.push_back(movements[i + 1].as_vector());
    }
    set.norm = NormStats::identity(kMovementDims);
    return set;
}

inline TrainingSet apply_norm(const TrainingSet& set, const NormStats& stats) {
    TrainingSet out;
    out.inputs.reserve(set.inputs.size());
    out.targets.reserve(set.targets.size());
    for (const Vec& v : set.inputs) out.inputs.push_back(stats.apply(v));
    for (const Vec& v : set.targets) out.targets.push_back(stats.apply(v));
    out.norm = stats;
    return out;
}

// Standardization fitted on the inputs only and applied to both sides.
inline TrainingSet normalize(const TrainingSet& set) {
    if (set.inputs.empty()) throw Error("normalize: empty training set");
    return apply_norm(set, NormStats::fit(set.inputs));
}

// Temporal prefix/suffix split; pairs are ordered, so no shuffling. The
// seed is accepted for interface stability but the contiguous strategy
// ignores it. Both parts stay non-empty (the ratio is clamped).
inline std::pair<TrainingSet, TrainingSet> split(const TrainingSet& set, double ratio,
                                                 std::uint64_t /*seed*/) {
    const std::size_t n = set.inputs.size();
    if (n < 2) throw Error("split: need at least two pairs");
    if (!(ratio > 0.0 && ratio < 1.0)) throw Error("split: ratio must be in (0,1)");
    const auto raw = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n)));
    const std::size_t n_train = std::clamp<std::size_t>(raw, 1, n - 1);

    auto take = [&set](std::size_t from, std::size_t to) {
        TrainingSet part;
        part.inputs.assign(set.inputs.begin() + from, set.inputs.begin() + to);
        part.targets.assign(set.targets.begin() + from, set.targets.begin() + to);
        part.norm = set.norm;
        return part;
    };
    return {take(0, n_train), take(n_train, n)};
}

// Population variance of each joint over a pose sequence.
inline std::array<double, mocap::kJointCount> joint_variance(
    const std::vector<mocap::RobotPose>& poses) {
    if (poses.empty()) throw Error("joint_variance: no poses");
    std::array<double, mocap::kJointCount> out{};
    const double n = static_cast<double>(poses.size());
    for (std::size_t j = 0; j < mocap::kJointCount; ++j) {
        double m = 0.0;
        for (const mocap::RobotPose& p : poses) m += p.angles[j];
        m /= n;
        double acc = 0.0;
        for (const mocap::RobotPose& p : poses) {
            const double d = p.angles[j] - m;
            acc += d * d;
        }
        out[j] = acc / n;
    }
    return out;
}

inline double mean_variance(const std::array<double, mocap::kJointCount>& per_joint) {
    double s = 0.0;
    for (double v : per_joint) s += v;
    return s / static_cast<double>(mocap::kJointCount);
}

// ---- dataset file ----
// {"joint_order": [names], "movements": [[20 reals]], "norm": {means, stds}}
// Movements are stored raw; the stats are what `normalize` produced so
// training applies exactly the same transform.

inline nlohmann::ordered_json dataset_to_json(const std::vector<Movement>& movements,
                                              const NormStats& norm) {
    nlohmann::ordered_json doc;
    doc["joint_order"] = mocap::kJointNames;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const Movement& m : movements) rows.push_back(m.as_vector());
    doc["movements"] = std::move(rows);
    doc["norm"] = {{"means", norm.means}, {"stds", norm.stds}};
    return doc;
}

struct DatasetFile {
    std::vector<Movement> movements;
    NormStats norm;
};

inline DatasetFile dataset_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("movements") || !doc.contains("norm")) {
        throw Error("dataset file: expected {joint_order, movements, norm}");
    }
    if (doc.contains("joint_order")) {
        const auto& order = doc["joint_order"];
        if (!order.is_array() || order.size() != mocap::kJointCount) {
            throw Error("dataset file: joint_order must list the 10 canonical joints");
        }
        for (std::size_t i = 0; i < mocap::kJointCount; ++i) {
            if (order[i].get<std::string>() != mocap::kJointNames[i]) {
                throw Error("dataset file: joint_order differs from the canonical order");
            }
        }
    }
    DatasetFile out;
    for (const auto& row : doc["movements"]) {
        out.movements.push_back(Movement::from_vector(row.get<Vec>()));
    }
    out.norm.means = doc["norm"]["means"].get<Vec>();
    out.norm.stds = doc["norm"]["stds"].get<Vec>();
    require_length(out.norm.means, kMovementDims, "dataset norm means");
    require_length(out.norm.stds, kMovementDims, "dataset norm stds");
    for (double s : out.norm.stds) {
        if (!(s > 0.0)) throw Error("dataset file: norm stds must be positive");
    }
    return out;
}

inline void save_dataset(const std::string& path, const std::vector<Movement>& movements,
                         const NormStats& norm) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write dataset file: " + path);
    out << dataset_to_json(movements, norm).dump(2) << '\n';
}

inline DatasetFile load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open dataset file: " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error("dataset file " + path + ": " + e.what());
    }
    return dataset_from_json(doc);
}

}  // namespace beatmotion::dataset
