#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "beatmotion/errors.hpp"

namespace beatmotion::mocap {

// The ten robot joints the retargeter produces, in canonical order. Every
// flattened vector, file column and report row follows this order.
enum class Joint : std::size_t {
    LElbowRoll = 0,
    RElbowRoll,
    LElbowYaw,
    RElbowYaw,
    LShoulderRoll,
    RShoulderRoll,
    LShoulderPitch,
    RShoulderPitch,
    HeadYaw,
    HeadPitch,
};

inline constexpr std::size_t kJointCount = 10;

inline constexpr std::array<const char*, kJointCount> kJointNames = {
    "LElbowRoll",     "RElbowRoll",     "LElbowYaw",      "RElbowYaw",
    "LShoulderRoll",  "RShoulderRoll",  "LShoulderPitch", "RShoulderPitch",
    "HeadYaw",        "HeadPitch",
};

inline const char* joint_name(Joint j) { return kJointNames[static_cast<std::size_t>(j)]; }

inline std::optional<Joint> joint_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kJointCount; ++i) {
        if (name == kJointNames[i]) return static_cast<Joint>(i);
    }
    return std::nullopt;
}

// One full assignment of the robot's upper-body joint angles, radians.
struct RobotPose {
    std::array<double, kJointCount> angles{};

    double& operator[](Joint j) { return angles[static_cast<std::size_t>(j)]; }
    double operator[](Joint j) const { return angles[static_cast<std::size_t>(j)]; }

    bool operator==(const RobotPose&) const = default;
};

struct JointLimits {
    std::array<double, kJointCount> min_rad{};
    std::array<double, kJointCount> max_rad{};

    double min(Joint j) const { return min_rad[static_cast<std::size_t>(j)]; }
    double max(Joint j) const { return max_rad[static_cast<std::size_t>(j)]; }

    void validate() const {
        for (std::size_t i = 0; i < kJointCount; ++i) {
            if (!(min_rad[i] < max_rad[i])) {
                throw ConfigError(kJointNames[i],
                                  std::string("joint limits: min must be below max for ") + kJointNames[i]);
            }
        }
    }
};

inline RobotPose clamp_pose(const RobotPose& pose, const JointLimits& limits) {
    RobotPose out = pose;
    for (std::size_t i = 0; i < kJointCount; ++i) {
        out.angles[i] = std::clamp(pose.angles[i], limits.min_rad[i], limits.max_rad[i]);
    }
    return out;
}

// Mechanical limits of a small humanoid's upper body. The same numbers ship
// in config/joint_limits.cfg; a --limits file overrides them.
inline JointLimits default_limits() {
    JointLimits lim;
    auto set = [&lim](Joint j, double lo, double hi) {
        lim.min_rad[static_cast<std::size_t>(j)] = lo;
        lim.max_rad[static_cast<std::size_t>(j)] = hi;
    };
    set(Joint::LElbowRoll, -1.5446, -0.0349);
    set(Joint::RElbowRoll, 0.0349, 1.5446);
    set(Joint::LElbowYaw, -2.0857, 2.0857);
    set(Joint::RElbowYaw, -2.0857, 2.0857);
    set(Joint::LShoulderRoll, -0.3142, 1.3265);
    set(Joint::RShoulderRoll, -1.3265, 0.3142);
    set(Joint::LShoulderPitch, -2.0857, 2.0857);
    set(Joint::RShoulderPitch, -2.0857, 2.0857);
    set(Joint::HeadYaw, -2.0857, 2.0857);
    set(Joint::HeadPitch, -0.6720, 0.5149);
    return lim;
}

// Flat key-value format, one entry per line: `JointName.min = <radians>` /
// `JointName.max = <radians>`. '#' starts a comment. Every joint needs both
// bounds.
inline JointLimits parse_limits(std::istream& in) {
    JointLimits lim;
    std::array<bool, kJointCount> have_min{};
    std::array<bool, kJointCount> have_max{};

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        // trim
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        const std::string entry = line.substr(first, last - first + 1);

        const auto eq = entry.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(entry, "limits line " + std::to_string(line_no) + ": expected `key = value`");
        }
        std::string key = entry.substr(0, eq);
        std::string value = entry.substr(eq + 1);
        auto strip = [](std::string& s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            s = (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
        };
        strip(key);
        strip(value);

        const auto dot = key.rfind('.');
        if (dot == std::string::npos) {
            throw ConfigError(key, "limits key `" + key + "` must be JointName.min or JointName.max");
        }
        const std::string joint_part = key.substr(0, dot);
        const std::string bound_part = key.substr(dot + 1);
        const auto joint = joint_from_name(joint_part);
        if (!joint) {
            throw ConfigError(key, "limits key `" + key + "` names an unknown joint");
        }
        if (bound_part != "min" && bound_part != "max") {
            throw ConfigError(key, "limits key `" + key + "` must end in .min or .max");
        }

        double parsed = 0.0;
        try {
            std::size_t used = 0;
            parsed = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::exception&) {
            throw ConfigError(key, "limits key `" + key + "` has a non-numeric value `" + value + "`");
        }
        if (!std::isfinite(parsed)) {
            throw ConfigError(key, "limits key `" + key + "` must be finite");
        }

        const auto idx = static_cast<std::size_t>(*joint);
        if (bound_part == "min") {
            lim.min_rad[idx] = parsed;
            have_min[idx] = true;
        } else {
            lim.max_rad[idx] = parsed;
            have_max[idx] = true;
        }
    }

    for (std::size_t i = 0; i < kJointCount; ++i) {
        if (!have_min[i]) {
            throw ConfigError(std::string(kJointNames[i]) + ".min",
                              std::string("limits file is missing ") + kJointNames[i] + ".min");
        }
        if (!have_max[i]) {
            throw ConfigError(std::string(kJointNames[i]) + ".max",
                              std::string("limits file is missing ") + kJointNames[i] + ".max");
        }
    }
    lim.validate();
    return lim;
}

inline JointLimits load_limits(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open limits file: " + path);
    return parse_limits(in);
}

}  // namespace beatmotion::mocap
