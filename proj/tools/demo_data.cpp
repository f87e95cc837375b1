// Generates a self-contained demo input set: a click-driven music clip and
// a matching synthetic dance capture, so the whole pipeline can be run
// without any recording hardware.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "beatmotion/geometry.hpp"
#include "beatmotion/mocap.hpp"
#include "beatmotion/wav.hpp"

namespace bm = beatmotion;
using bm::Vec3;

namespace {

std::vector<std::int16_t> make_music(double bpm, double seconds, int sample_rate) {
    const auto n = static_cast<std::size_t>(seconds * sample_rate);
    std::vector<double> samples(n, 0.0);

    // background tone whose level ramps over the clip, so segments differ
    // in loudness
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        const double level = 0.05 + 0.25 * t / seconds;
        samples[i] = level * std::sin(2.0 * std::numbers::pi * 220.0 * t);
    }

    // decaying clicks on the beat
    const double interval = 60.0 / bpm;
    const auto click_len = static_cast<std::size_t>(0.004 * sample_rate);
    for (double beat = 0.25; beat < seconds; beat += interval) {
        const auto start = static_cast<std::size_t>(beat * sample_rate);
        for (std::size_t i = 0; i < click_len && start + i < n; ++i) {
            const double decay = std::exp(-5.0 * static_cast<double>(i) / click_len);
            samples[start + i] += 0.85 * decay;
        }
    }

    std::vector<std::int16_t> pcm(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = std::clamp(samples[i], -1.0, 1.0);
        pcm[i] = static_cast<std::int16_t>(std::lround(v * 32000.0));
    }
    return pcm;
}

// Forward kinematics for one arm from the repo's angle conventions:
// pitch 0 = arm down, roll positive = left arm outward.
Vec3 arm_direction(double pitch, double roll) {
    return Vec3{-std::sin(roll), -std::cos(roll) * std::cos(pitch), std::cos(roll) * std::sin(pitch)};
}

std::vector<bm::mocap::SkeletonFrame> make_dance(double bpm, double seconds, double fps) {
    using bm::mocap::HumanJoint;
    std::vector<bm::mocap::SkeletonFrame> frames;
    const double beat_hz = bpm / 60.0;
    const double upper = 0.25;
    const double fore = 0.24;

    for (double t = 0.0; t < seconds; t += 1.0 / fps) {
        bm::mocap::SkeletonFrame f;
        f.t = t;
        f[HumanJoint::Torso] = {0.0, 1.0, 0.0};
        f[HumanJoint::Neck] = {0.0, 1.25, 0.0};
        f[HumanJoint::LeftShoulder] = {-0.2, 1.2, 0.0};
        f[HumanJoint::RightShoulder] = {0.2, 1.2, 0.0};
        f[HumanJoint::LeftHip] = {-0.12, 0.62, 0.0};
        f[HumanJoint::RightHip] = {0.12, 0.62, 0.0};
        f[HumanJoint::LeftKnee] = {-0.12, 0.32, 0.0};
        f[HumanJoint::RightKnee] = {0.12, 0.32, 0.0};
        f[HumanJoint::LeftFoot] = {-0.12, 0.02, 0.0};
        f[HumanJoint::RightFoot] = {0.12, 0.02, 0.0};

        const double phase = 2.0 * std::numbers::pi * beat_hz * t;
        const double l_pitch = 0.9 * std::sin(phase / 2.0);
        const double l_roll = 0.45 + 0.4 * std::sin(phase / 4.0 + 0.7);
        const double r_pitch = 0.9 * std::sin(phase / 2.0 + 1.3);
        const double r_roll = -0.45 - 0.4 * std::sin(phase / 4.0);
        const double l_bend = 0.5 + 0.45 * std::sin(phase / 2.0 + 0.3);
        const double r_bend = 0.5 + 0.45 * std::sin(phase / 2.0 + 2.1);

        auto build_arm = [&](HumanJoint shoulder, HumanJoint elbow, HumanJoint hand, double pitch,
                             double roll, double bend) {
            const Vec3 a = arm_direction(pitch, roll);
            f[elbow] = f[shoulder] + upper * a;
            Vec3 ref = Vec3{0.0, 0.0, 1.0} - dot(Vec3{0.0, 0.0, 1.0}, a) * a;
            if (bm::norm(ref) < 1e-6) ref = Vec3{0.0, -1.0, 0.0} - dot(Vec3{0.0, -1.0, 0.0}, a) * a;
            const Vec3 e1 = bm::normalized(ref);
            const Vec3 dir = std::cos(bend) * a + std::sin(bend) * e1;
            f[hand] = f[elbow] + fore * dir;
        };
        build_arm(HumanJoint::LeftShoulder, HumanJoint::LeftElbow, HumanJoint::LeftHand, l_pitch,
                  l_roll, l_bend);
        build_arm(HumanJoint::RightShoulder, HumanJoint::RightElbow, HumanJoint::RightHand, r_pitch,
                  r_roll, r_bend);

        const double head_yaw = 0.3 * std::sin(phase / 8.0);
        const double head_pitch = 0.15 * std::sin(phase / 6.0 + 0.4);
        f[HumanJoint::Head] =
            f[HumanJoint::Neck] + 0.16 * bm::normalized(Vec3{-std::sin(head_yaw),
                                                             1.0, std::sin(head_pitch)});
        frames.push_back(f);
    }
    return frames;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"generate demo music + capture inputs for the beatmotion pipeline"};
    std::string out_dir = ".";
    double bpm = 120.0;
    double seconds = 16.0;
    app.add_option("-o,--out-dir", out_dir, "output directory (must exist)");
    app.add_option("--bpm", bpm, "click tempo");
    app.add_option("--seconds", seconds, "clip length");
    CLI11_PARSE(app, argc, argv);

    const std::string wav_path = out_dir + "/music.wav";
    const std::string skel_path = out_dir + "/dance.jsonl";

    const auto pcm = make_music(bpm, seconds, 44100);
    const auto bytes = bm::audio::encode_wav_pcm16(pcm, 44100);
    std::ofstream wav(wav_path, std::ios::binary);
    if (!wav) {
        std::cerr << "cannot write " << wav_path << '\n';
        return 1;
    }
    wav.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));

    const auto frames = make_dance(bpm, seconds, 30.0);
    std::ofstream skel(skel_path);
    if (!skel) {
        std::cerr << "cannot write " << skel_path << '\n';
        return 1;
    }
    bm::mocap::write_skeleton(skel, frames);

    std::cout << "wrote " << wav_path << " and " << skel_path << '\n';
    return 0;
}
