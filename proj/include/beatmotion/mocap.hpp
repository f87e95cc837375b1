#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "beatmotion/audio_types.hpp"
#include "beatmotion/errors.hpp"
#include "beatmotion/geometry.hpp"
#include "beatmotion/pose.hpp"

namespace beatmotion::mocap {

// The fifteen capture landmarks, as delivered by a depth-camera skeleton
// stream. Lower-body joints are parsed and validated but never influence
// the retargeted pose.
enum class HumanJoint : std::size_t {
    Head = 0,
    Neck,
    Torso,
    LeftShoulder,
    RightShoulder,
    LeftElbow,
    RightElbow,
    LeftHand,
    RightHand,
    LeftHip,
    RightHip,
    LeftKnee,
    RightKnee,
    LeftFoot,
    RightFoot,
};

inline constexpr std::size_t kHumanJointCount = 15;

inline constexpr std::array<const char*, kHumanJointCount> kHumanJointNames = {
    "head",       "neck",       "torso",      "left_shoulder", "right_shoulder",
    "left_elbow", "right_elbow", "left_hand",  "right_hand",    "left_hip",
    "right_hip",  "left_knee",  "right_knee", "left_foot",     "right_foot",
};

inline std::optional<HumanJoint> human_joint_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kHumanJointCount; ++i) {
        if (name == kHumanJointNames[i]) return static_cast<HumanJoint>(i);
    }
    return std::nullopt;
}

struct SkeletonFrame {
    double t = 0.0;  // seconds, shared origin with the audio clip (t = 0 at audio start)
    std::array<Vec3, kHumanJointCount> joints{};

    Vec3& operator[](HumanJoint j) { return joints[static_cast<std::size_t>(j)]; }
    Vec3 operator[](HumanJoint j) const { return joints[static_cast<std::size_t>(j)]; }

    bool operator==(const SkeletonFrame&) const = default;
};

// Body-centric orthonormal frame anchored at the torso.
struct BodyFrame {
    Vec3 origin;
    Vec3 up;
    Vec3 right;
    Vec3 forward;
};

// up follows the spine, right follows the shoulder line with the spine
// component removed, forward = right x up (so an upright T-pose facing +z
// gives up=(0,1,0), right=(1,0,0), forward=(0,0,1)).
inline BodyFrame body_frame(const SkeletonFrame& frame) {
    const Vec3 spine = frame[HumanJoint::Neck] - frame[HumanJoint::Torso];
    if (norm(spine) < 1e-9) throw Error("body_frame: neck and torso coincide");
    const Vec3 up = normalized(spine);

    const Vec3 shoulder_axis = frame[HumanJoint::RightShoulder] - frame[HumanJoint::LeftShoulder];
    if (norm(shoulder_axis) < 1e-9) throw Error("body_frame: shoulders coincide");
    const Vec3 right_raw = shoulder_axis - dot(shoulder_axis, up) * up;
    if (norm(right_raw) < 1e-9) throw Error("body_frame: shoulder line parallel to the spine");
    const Vec3 right = normalized(right_raw);

    return BodyFrame{frame[HumanJoint::Torso], up, right, cross(right, up)};
}

namespace detail {

inline Vec3 to_body(const BodyFrame& bf, Vec3 v) {
    return Vec3{dot(v, bf.right), dot(v, bf.up), dot(v, bf.forward)};
}

struct ArmAngles {
    double shoulder_pitch = 0.0;
    double shoulder_roll = 0.0;
    double elbow_bend = 0.0;  // unsigned angle between upper arm and forearm
    double elbow_yaw = 0.0;
};

// Angle conventions (canonical for this repo, see README):
//   ShoulderPitch = atan2(a_fwd, -a_up): 0 with the arm hanging down,
//                   +pi/2 pointing forward.
//   ShoulderRoll  = asin(-a_right / |a|): positive when the LEFT arm lifts
//                   outward; the mirrored right arm goes negative.
//   ElbowBend     = angle(upper arm, forearm): 0 for a straight arm.
//   ElbowYaw      = direction of the forearm in the plane normal to the
//                   upper arm, 0 when the bend stays in the pitch plane.
inline ArmAngles arm_angles(const BodyFrame& bf, Vec3 shoulder, Vec3 elbow, Vec3 hand) {
    const Vec3 upper = to_body(bf, elbow - shoulder);
    const Vec3 fore = to_body(bf, hand - elbow);
    const double upper_len = norm(upper);
    const double fore_len = norm(fore);
    if (upper_len < 1e-9) throw Error("retarget: zero-length upper arm");
    if (fore_len < 1e-9) throw Error("retarget: zero-length forearm");

    ArmAngles out;
    out.shoulder_pitch = std::atan2(upper.z, -upper.y);
    out.shoulder_roll = std::asin(std::clamp(-upper.x / upper_len, -1.0, 1.0));

    const Vec3 a_hat = (1.0 / upper_len) * upper;
    const Vec3 f_hat = (1.0 / fore_len) * fore;
    out.elbow_bend = std::acos(std::clamp(dot(a_hat, f_hat), -1.0, 1.0));

    // reference direction for yaw: body-forward projected off the arm axis,
    // falling back to body-down when the arm itself points forward
    Vec3 ref = Vec3{0.0, 0.0, 1.0} - dot(Vec3{0.0, 0.0, 1.0}, a_hat) * a_hat;
    if (norm(ref) < 1e-6) {
        ref = Vec3{0.0, -1.0, 0.0} - dot(Vec3{0.0, -1.0, 0.0}, a_hat) * a_hat;
    }
    const Vec3 e1 = normalized(ref);
    const Vec3 e2 = cross(a_hat, e1);
    const Vec3 fore_perp = fore - dot(fore, a_hat) * a_hat;
    if (norm(fore_perp) < 1e-9 * fore_len) {
        out.elbow_yaw = 0.0;  // straight arm: yaw has no effect
    } else {
        out.elbow_yaw = std::atan2(dot(fore_perp, e2), dot(fore_perp, e1));
    }
    return out;
}

}  // namespace detail

// Map one skeleton frame into the ten-joint robot pose space and clamp it
// into the configured limits. All angles live in the body frame, which
// makes the result invariant under rigid motion of the whole skeleton.
inline RobotPose retarget(const SkeletonFrame& frame, const JointLimits& limits) {
    const BodyFrame bf = body_frame(frame);

    const detail::ArmAngles left = detail::arm_angles(
        bf, frame[HumanJoint::LeftShoulder], frame[HumanJoint::LeftElbow], frame[HumanJoint::LeftHand]);
    const detail::ArmAngles right =
        detail::arm_angles(bf, frame[HumanJoint::RightShoulder], frame[HumanJoint::RightElbow],
                           frame[HumanJoint::RightHand]);

    const Vec3 head_vec = detail::to_body(bf, frame[HumanJoint::Head] - frame[HumanJoint::Neck]);
    if (norm(head_vec) < 1e-9) throw Error("retarget: zero-length head vector");

    RobotPose pose;
    pose[Joint::LShoulderPitch] = left.shoulder_pitch;
    pose[Joint::RShoulderPitch] = right.shoulder_pitch;
    pose[Joint::LShoulderRoll] = left.shoulder_roll;
    pose[Joint::RShoulderRoll] = right.shoulder_roll;
    pose[Joint::LElbowYaw] = left.elbow_yaw;
    pose[Joint::RElbowYaw] = right.elbow_yaw;
    pose[Joint::LElbowRoll] = -left.elbow_bend;  // left bends negative, right positive
    pose[Joint::RElbowRoll] = right.elbow_bend;
    pose[Joint::HeadPitch] = std::atan2(head_vec.z, head_vec.y);
    pose[Joint::HeadYaw] = std::atan2(-head_vec.x, head_vec.y);
    return clamp_pose(pose, limits);
}

struct TimedPose {
    double t = 0.0;
    RobotPose pose;
};

// One retargeted pose per beat, taken from the capture frame whose
// timestamp is nearest (earlier frame wins ties; beats outside the capture
// range use the boundary frame).
inline std::vector<TimedPose> sample_on_beats(const std::vector<SkeletonFrame>& frames,
                                              const audio::BeatGrid& grid, const JointLimits& limits) {
    if (frames.empty()) throw Error("sample_on_beats: no capture frames");
    std::vector<TimedPose> out;
    out.reserve(grid.beats.size());
    for (double beat : grid.beats) {
        std::size_t lo = 0;
        std::size_t hi = frames.size();
        while (lo < hi) {  // first frame with t >= beat
            const std::size_t mid = (lo + hi) / 2;
            if (frames[mid].t < beat) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        std::size_t pick;
        if (lo == 0) {
            pick = 0;
        } else if (lo == frames.size()) {
            pick = frames.size() - 1;
        } else {
            pick = (beat - frames[lo - 1].t <= frames[lo].t - beat) ? lo - 1 : lo;
        }
        out.push_back(TimedPose{beat, retarget(frames[pick], limits)});
    }
    return out;
}

// ---- skeleton JSONL ----
// One frame per line: {"t": seconds, "joints": {"name": [x, y, z], ...}}
// with exactly the fifteen landmark names.

inline std::vector<SkeletonFrame> parse_skeleton(std::istream& in) {
    using Kind = LineParseError::Kind;
    std::vector<SkeletonFrame> frames;
    std::string line;
    std::size_t line_no = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw LineParseError(Kind::MalformedLine, line_no,
                                 std::string("malformed skeleton line: ") + e.what());
        }
        if (!obj.is_object() || !obj.contains("t") || !obj.contains("joints") ||
            !obj["t"].is_number() || !obj["joints"].is_object()) {
            throw LineParseError(Kind::MalformedLine, line_no,
                                 "skeleton line must be {\"t\": seconds, \"joints\": {...}}");
        }

        SkeletonFrame frame;
        frame.t = obj["t"].get<double>();
        if (!std::isfinite(frame.t)) {
            throw LineParseError(Kind::BadValue, line_no, "non-finite timestamp");
        }

        std::array<bool, kHumanJointCount> seen{};
        for (const auto& [name, coords] : obj["joints"].items()) {
            const auto joint = human_joint_from_name(name);
            if (!joint) {
                throw LineParseError(Kind::UnknownJoint, line_no, "unknown joint `" + name + "`");
            }
            if (!coords.is_array() || coords.size() != 3 || !coords[0].is_number() ||
                !coords[1].is_number() || !coords[2].is_number()) {
                throw LineParseError(Kind::BadValue, line_no,
                                     "joint `" + name + "` needs [x, y, z] coordinates");
            }
            const Vec3 p{coords[0].get<double>(), coords[1].get<double>(), coords[2].get<double>()};
            if (!finite(p)) {
                throw LineParseError(Kind::BadValue, line_no,
                                     "joint `" + name + "` has non-finite coordinates");
            }
            frame[*joint] = p;
            seen[static_cast<std::size_t>(*joint)] = true;
        }
        for (std::size_t i = 0; i < kHumanJointCount; ++i) {
            if (!seen[i]) {
                throw LineParseError(Kind::MissingJoint, line_no,
                                     std::string("missing joint `") + kHumanJointNames[i] + "`");
            }
        }

        if (!frames.empty() && !(frame.t > frames.back().t)) {
            throw LineParseError(Kind::NonMonotonicTimestamp, line_no,
                                 "timestamps must be strictly increasing");
        }
        frames.push_back(frame);
    }
    return frames;
}

inline std::vector<SkeletonFrame> load_skeleton(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open skeleton file: " + path);
    return parse_skeleton(in);
}

inline void write_skeleton(std::ostream& out, const std::vector<SkeletonFrame>& frames) {
    for (const SkeletonFrame& frame : frames) {
        nlohmann::ordered_json joints;
        for (std::size_t i = 0; i < kHumanJointCount; ++i) {
            const Vec3 p = frame.joints[i];
            joints[kHumanJointNames[i]] = {p.x, p.y, p.z};
        }
        nlohmann::ordered_json obj;
        obj["t"] = frame.t;
        obj["joints"] = std::move(joints);
        out << obj.dump() << '\n';
    }
}

// ---- pose JSONL ----
// One retargeted pose per beat: {"t": seconds, "joints": {JointName: rad}}.

inline void write_poses(std::ostream& out, const std::vector<TimedPose>& poses) {
    for (const TimedPose& tp : poses) {
        nlohmann::ordered_json joints;
        for (std::size_t i = 0; i < kJointCount; ++i) joints[kJointNames[i]] = tp.pose.angles[i];
        nlohmann::ordered_json obj;
        obj["t"] = tp.t;
        obj["joints"] = std::move(joints);
        out << obj.dump() << '\n';
    }
}

inline std::vector<TimedPose> parse_poses(std::istream& in) {
    using Kind = LineParseError::Kind;
    std::vector<TimedPose> poses;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw LineParseError(Kind::MalformedLine, line_no,
                                 std::string("malformed pose line: ") + e.what());
        }
        if (!obj.is_object() || !obj.contains("t") || !obj.contains("joints") ||
            !obj["t"].is_number() || !obj["joints"].is_object()) {
            throw LineParseError(Kind::MalformedLine, line_no,
                                 "pose line must be {\"t\": seconds, \"joints\": {...}}");
        }
        TimedPose tp;
        tp.t = obj["t"].get<double>();
        std::array<bool, kJointCount> seen{};
        for (const auto& [name, value] : obj["joints"].items()) {
            const auto joint = joint_from_name(name);
            if (!joint) throw LineParseError(Kind::UnknownJoint, line_no, "unknown joint `" + name + "`");
            if (!value.is_number()) {
                throw LineParseError(Kind::BadValue, line_no, "joint `" + name + "` needs a number");
            }
            tp.pose[*joint] = value.get<double>();
            seen[static_cast<std::size_t>(*joint)] = true;
        }
        for (std::size_t i = 0; i < kJointCount; ++i) {
            if (!seen[i]) {
                throw LineParseError(Kind::MissingJoint, line_no,
                                     std::string("missing joint `") + kJointNames[i] + "`");
            }
        }
        poses.push_back(tp);
    }
    return poses;
}

inline std::vector<TimedPose> load_poses(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open pose file: " + path);
    return parse_poses(in);
}

}  // namespace beatmotion::mocap
