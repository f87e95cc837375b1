#pragma once

// Test-only oracles and synthetic fixtures. Everything here is independent
// of the library code paths it is used to check: integration instead of
// closed forms, series instead of rational approximations, finite
// differences instead of backprop.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "beatmotion/audio_types.hpp"
#include "beatmotion/geometry.hpp"
#include "beatmotion/mocap.hpp"
#include "beatmotion/nn.hpp"
#include "beatmotion/pose.hpp"
#include "beatmotion/rng.hpp"

namespace synth {

namespace bm = beatmotion;

// ---- audio fixtures ----

// Click train: short decaying bursts at `bpm`, first click at 0.25 s,
// optional white noise at `noise_db` dBFS.
inline bm::audio::PcmSignal click_track(double bpm, double seconds, int sample_rate,
                                        double noise_db = -200.0, std::uint64_t seed = 1,
                                        double click_amp = 0.9) {
    bm::audio::PcmSignal sig;
    sig.sample_rate = sample_rate;
    sig.samples.assign(static_cast<std::size_t>(seconds * sample_rate), 0.0);

    if (noise_db > -150.0) {
        bm::Rng rng(seed);
        const double amp = std::pow(10.0, noise_db / 20.0);
        for (double& s : sig.samples) s = amp * rng.uniform(-1.0, 1.0);
    }

    const double interval = 60.0 / bpm;
    const auto click_len = static_cast<std::size_t>(0.003 * sample_rate);
    for (double beat = 0.25; beat < seconds; beat += interval) {
        const auto start = static_cast<std::size_t>(beat * sample_rate);
        for (std::size_t i = 0; i < click_len && start + i < sig.samples.size(); ++i) {
            const double decay = std::exp(-6.0 * static_cast<double>(i) / click_len);
            sig.samples[start + i] += click_amp * decay;
        }
    }
    for (double& s : sig.samples) s = std::clamp(s, -1.0, 1.0);
    return sig;
}

inline bm::audio::PcmSignal tone(double freq, double seconds, int sample_rate, double amp = 0.5) {
    bm::audio::PcmSignal sig;
    sig.sample_rate = sample_rate;
    const auto n = static_cast<std::size_t>(seconds * sample_rate);
    sig.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        sig.samples[i] = amp * std::sin(2.0 * std::numbers::pi * freq * i / sample_rate);
    }
    return sig;
}

inline bm::audio::PcmSignal silence(double seconds, int sample_rate) {
    bm::audio::PcmSignal sig;
    sig.sample_rate = sample_rate;
    sig.samples.assign(static_cast<std::size_t>(seconds * sample_rate), 0.0);
    return sig;
}

// ---- normal distribution oracles ----

// Phi via the Taylor-type series Phi(x) = 1/2 + pdf(x) * sum x^(2k+1)/(2k+1)!!,
// evaluated in long double. Independent of the rational-polynomial probit.
inline double series_normal_cdf(double x) {
    const long double xl = x;
    long double term = xl;
    long double sum = xl;
    for (int k = 1; k < 500; ++k) {
        term *= xl * xl / static_cast<long double>(2 * k + 1);
        sum += term;
        if (std::abs(static_cast<double>(term)) < 1e-20L * std::abs(static_cast<double>(sum))) break;
    }
    const long double pdf = std::exp(-xl * xl / 2.0L) / std::sqrt(2.0L * std::numbers::pi_v<long double>);
    return static_cast<double>(0.5L + pdf * sum);
}

// Solve series_normal_cdf(z) = u by bisection.
inline double bisect_probit(double u, double lo = -40.0, double hi = 40.0) {
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (series_normal_cdf(mid) < u) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// KL(N(mq, sq^2) || N(mp, sp^2)) by Simpson integration of q ln(q/p).
inline double numeric_kl(double mq, double sq, double mp, double sp) {
    const double lo = std::min(mq - 15.0 * sq, mp - 15.0 * sp);
    const double hi = std::max(mq + 15.0 * sq, mp + 15.0 * sp);
    const int n = 40000;  // even
    const double h = (hi - lo) / n;
    auto integrand = [&](double z) {
        const double q = std::exp(-(z - mq) * (z - mq) / (2.0 * sq * sq)) /
                         (sq * std::sqrt(2.0 * std::numbers::pi));
        if (q < 1e-300) return 0.0;
        const double log_q = -std::log(sq) - 0.5 * std::log(2.0 * std::numbers::pi) -
                             (z - mq) * (z - mq) / (2.0 * sq * sq);
        const double log_p = -std::log(sp) - 0.5 * std::log(2.0 * std::numbers::pi) -
                             (z - mp) * (z - mp) / (2.0 * sp * sp);
        return q * (log_q - log_p);
    };
    double sum = integrand(lo) + integrand(hi);
    for (int i = 1; i < n; ++i) {
        sum += integrand(lo + i * h) * ((i % 2 == 1) ? 4.0 : 2.0);
    }
    return sum * h / 3.0;
}

// ---- gradient checking ----

inline double elbo_total(const bm::nn::VaeModel& model, const std::vector<bm::Vec>& inputs,
                         const std::vector<bm::Vec>& targets, const std::vector<bm::Vec>& noise) {
    return bm::nn::elbo_loss(model, inputs, targets, noise).first.total;
}

// Central finite differences of the total loss wrt every parameter.
inline bm::Vec fd_gradient(const bm::nn::VaeModel& model, const std::vector<bm::Vec>& inputs,
                           const std::vector<bm::Vec>& targets, const std::vector<bm::Vec>& noise,
                           double h = 1e-5) {
    bm::nn::VaeModel probe = model;
    const bm::Vec base = model.flatten_params();
    bm::Vec grad(base.size(), 0.0);
    for (std::size_t i = 0; i < base.size(); ++i) {
        bm::Vec params = base;
        params[i] = base[i] + h;
        probe.set_params(params);
        const double up = elbo_total(probe, inputs, targets, noise);
        params[i] = base[i] - h;
        probe.set_params(params);
        const double down = elbo_total(probe, inputs, targets, noise);
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

// Largest relative disagreement, with the denominator floored so that a
// pair of ~zero gradients compares in absolute terms.
inline double max_rel_error(const bm::Vec& a, const bm::Vec& b, double floor_at = 1e-6) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double denom = std::max({std::abs(a[i]), std::abs(b[i]), floor_at});
        worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
    }
    return worst;
}

struct RandomVaeCase {
    bm::nn::VaeModel model;
    std::vector<bm::Vec> inputs;
    std::vector<bm::Vec> targets;
    std::vector<bm::Vec> noise;
};

inline RandomVaeCase random_vae_case(std::uint64_t seed) {
    bm::Rng rng(seed);
    const std::size_t input_dim = 3 + rng.index(6);
    const std::size_t hidden = 4 + rng.index(9);
    const std::size_t latent = 1 + rng.index(3);
    const std::size_t batch = 2 + rng.index(4);
    const bm::nn::GaussianPrior prior{rng.uniform(-1.0, 1.0), rng.uniform(0.5, 2.0)};

    RandomVaeCase c{bm::nn::make_vae(input_dim, hidden, latent, prior, rng), {}, {}, {}};
    for (std::size_t s = 0; s < batch; ++s) {
        bm::Vec x(input_dim), t(input_dim), e(latent);
        for (double& v : x) v = rng.uniform(-1.5, 1.5);
        for (double& v : t) v = rng.uniform(-1.5, 1.5);
        for (double& v : e) v = prior.mean + prior.std * rng.normal();
        c.inputs.push_back(std::move(x));
        c.targets.push_back(std::move(t));
        c.noise.push_back(std::move(e));
    }
    return c;
}

// ---- skeleton fixtures ----

// Forward kinematics from the repo's angle conventions, so retargeting can
// be checked against known angles.
inline bm::Vec3 arm_direction(double pitch, double roll) {
    return bm::Vec3{-std::sin(roll), -std::cos(roll) * std::cos(pitch),
                    std::cos(roll) * std::sin(pitch)};
}

struct ArmSpec {
    double pitch = 0.0;
    double roll = 0.0;
    double bend = 0.0;  // elbow bend inside the pitch plane when yaw_dir = 0
    double yaw = 0.0;   // rotation of the bend plane around the upper arm
};

// Upright, axis-aligned skeleton (up = +y, right = +x, forward = +z) with
// both arms posed analytically.
inline bm::mocap::SkeletonFrame posed_skeleton(const ArmSpec& left, const ArmSpec& right,
                                               double t = 0.0) {
    using bm::mocap::HumanJoint;
    bm::mocap::SkeletonFrame f;
    f.t = t;
    f[HumanJoint::Torso] = {0.0, 1.0, 0.0};
    f[HumanJoint::Neck] = {0.0, 1.25, 0.0};
    f[HumanJoint::Head] = {0.0, 1.41, 0.0};
    f[HumanJoint::LeftShoulder] = {-0.2, 1.2, 0.0};
    f[HumanJoint::RightShoulder] = {0.2, 1.2, 0.0};
    f[HumanJoint::LeftHip] = {-0.1, 0.6, 0.0};
    f[HumanJoint::RightHip] = {0.1, 0.6, 0.0};
    f[HumanJoint::LeftKnee] = {-0.1, 0.3, 0.0};
    f[HumanJoint::RightKnee] = {0.1, 0.3, 0.0};
    f[HumanJoint::LeftFoot] = {-0.1, 0.0, 0.0};
    f[HumanJoint::RightFoot] = {0.1, 0.0, 0.0};

    auto place = [&f](HumanJoint shoulder, HumanJoint elbow, HumanJoint hand, const ArmSpec& arm) {
        const double upper_len = 0.25;
        const double fore_len = 0.24;
        const bm::Vec3 a = arm_direction(arm.pitch, arm.roll);
        f[elbow] = f[shoulder] + upper_len * a;
        bm::Vec3 ref = bm::Vec3{0.0, 0.0, 1.0} - dot(bm::Vec3{0.0, 0.0, 1.0}, a) * a;
        if (bm::norm(ref) < 1e-9) {
            ref = bm::Vec3{0.0, -1.0, 0.0} - dot(bm::Vec3{0.0, -1.0, 0.0}, a) * a;
        }
        const bm::Vec3 e1 = bm::normalized(ref);
        const bm::Vec3 e2 = bm::cross(a, e1);
        const bm::Vec3 bend_dir = std::cos(arm.yaw) * e1 + std::sin(arm.yaw) * e2;
        const bm::Vec3 dir = std::cos(arm.bend) * a + std::sin(arm.bend) * bend_dir;
        f[hand] = f[elbow] + fore_len * dir;
    };
    place(HumanJoint::LeftShoulder, HumanJoint::LeftElbow, HumanJoint::LeftHand, left);
    place(HumanJoint::RightShoulder, HumanJoint::RightElbow, HumanJoint::RightHand, right);
    return f;
}

// Rotation matrix from axis-angle (Rodrigues).
struct Rot3 {
    std::array<std::array<double, 3>, 3> m{};

    static Rot3 axis_angle(bm::Vec3 axis, double angle) {
        const bm::Vec3 u = bm::normalized(axis);
        const double c = std::cos(angle);
        const double s = std::sin(angle);
        Rot3 r;
        r.m = {{{c + u.x * u.x * (1 - c), u.x * u.y * (1 - c) - u.z * s,
                 u.x * u.z * (1 - c) + u.y * s},
                {u.y * u.x * (1 - c) + u.z * s, c + u.y * u.y * (1 - c),
                 u.y * u.z * (1 - c) - u.x * s},
                {u.z * u.x * (1 - c) - u.y * s, u.z * u.y * (1 - c) + u.x * s,
                 c + u.z * u.z * (1 - c)}}};
        return r;
    }

    bm::Vec3 apply(bm::Vec3 v) const {
        return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
                m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
                m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
    }
};

inline bm::mocap::SkeletonFrame rigid_transform(const bm::mocap::SkeletonFrame& frame,
                                                const Rot3& rot, bm::Vec3 translation) {
    bm::mocap::SkeletonFrame out = frame;
    for (auto& p : out.joints) p = rot.apply(p) + translation;
    return out;
}

// ---- pose-space fixtures ----

// Smooth arm oscillations in pose space: every joint follows its own
// sinusoid inside the default limits. 2*count+1 poses yield `count`
// movements after coupling and shifting.
inline std::vector<bm::mocap::RobotPose> oscillation_poses(std::size_t count,
                                                           std::uint64_t seed = 7) {
    using bm::mocap::Joint;
    bm::Rng rng(seed);
    std::array<double, bm::mocap::kJointCount> phase{};
    for (double& p : phase) p = rng.uniform(0.0, 2.0 * std::numbers::pi);

    const bm::mocap::JointLimits lim = bm::mocap::default_limits();
    std::vector<bm::mocap::RobotPose> poses;
    poses.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        bm::mocap::RobotPose p;
        for (std::size_t j = 0; j < bm::mocap::kJointCount; ++j) {
            const double mid = 0.5 * (lim.min_rad[j] + lim.max_rad[j]);
            const double amp = 0.45 * (lim.max_rad[j] - lim.min_rad[j]);
            const double w = 0.19 + 0.05 * static_cast<double>(j % 3);
            p.angles[j] = mid + amp * std::sin(w * static_cast<double>(k) + phase[j]);
        }
        poses.push_back(p);
    }
    return poses;
}

}  // namespace synth
