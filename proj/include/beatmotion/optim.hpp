#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>

#include "beatmotion/linalg.hpp"

namespace beatmotion::optim {

// Running accumulators for the adaptive step rule. There is deliberately no
// learning-rate anywhere in this module: the step size comes entirely from
// the ratio of the two RMS terms.
struct AdadeltaState {
    Vec avg_sq_grad;    // E[g^2]
    Vec avg_sq_update;  // E[dtheta^2]
    double gamma = 0.9;
    double epsilon = 1e-6;

    AdadeltaState() = default;
    explicit AdadeltaState(std::size_t n, double gamma_ = 0.9, double epsilon_ = 1e-6)
        : avg_sq_grad(n, 0.0), avg_sq_update(n, 0.0), gamma(gamma_), epsilon(epsilon_) {
        if (!(gamma > 0.0 && gamma < 1.0)) throw Error("adadelta: gamma must be in (0,1)");
        if (!(epsilon > 0.0)) throw Error("adadelta: epsilon must be positive");
    }
};

// One update, elementwise and in this exact order:
//   E[g^2]      <- gamma E[g^2] + (1-gamma) g^2
//   dtheta       = -(sqrt(E[dtheta^2]+eps) / sqrt(E[g^2]+eps)) g
//   E[dtheta^2] <- gamma E[dtheta^2] + (1-gamma) dtheta^2
//   theta       <- theta + dtheta
// The first step therefore moves by sqrt(eps)/RMS[g].
inline void adadelta_step(AdadeltaState& state, Vec& params, const Vec& grads) {
    if (params.size() != grads.size() || state.avg_sq_grad.size() != params.size() ||
        state.avg_sq_update.size() != params.size()) {
        std::ostringstream os;
        os << "adadelta_step: shape mismatch (params " << params.size() << ", grads " << grads.size()
           << ", state " << state.avg_sq_grad.size() << ")";
        throw DimensionError(os.str());
    }
    if (!all_finite(grads)) throw Error("adadelta_step: non-finite gradient");

    const double gamma = state.gamma;
    const double eps = state.epsilon;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.avg_sq_grad[i] = gamma * state.avg_sq_grad[i] + (1.0 - gamma) * g * g;
        const double delta =
            -(std::sqrt(state.avg_sq_update[i] + eps) / std::sqrt(state.avg_sq_grad[i] + eps)) * g;
        state.avg_sq_update[i] = gamma * state.avg_sq_update[i] + (1.0 - gamma) * delta * delta;
        params[i] += delta;
    }
}

// Plain SGD baseline used for cross-checks.
inline void sgd_step(Vec& params, const Vec& grads, double eta) {
    if (params.size() != grads.size()) {
        std::ostringstream os;
        os << "sgd_step: shape mismatch (params " << params.size() << ", grads " << grads.size() << ")";
        throw DimensionError(os.str());
    }
    if (!(eta > 0.0) && eta != 0.0) throw Error("sgd_step: eta must be nonnegative and finite");
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= eta * grads[i];
}

}  // namespace beatmotion::optim
