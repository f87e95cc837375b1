#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <tuple>
#include <vector>

#include "beatmotion/dataset.hpp"
#include "beatmotion/nn.hpp"
#include "beatmotion/optim.hpp"
#include "beatmotion/rng.hpp"

namespace beatmotion::train {

struct TrainConfig {
    std::size_t epochs = 25;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    std::size_t checkpoint_every = 5;
    std::size_t hidden_dim = 64;
    std::size_t latent_dim = 2;

    void validate() const {
        if (epochs == 0) throw Error("train: epochs must be positive");
        if (batch_size == 0) throw Error("train: batch_size must be positive");
        if (checkpoint_every == 0) throw Error("train: checkpoint_every must be positive");
        if (hidden_dim == 0 || latent_dim == 0) throw Error("train: layer sizes must be positive");
    }
};

struct EpochLoss {
    std::size_t epoch = 0;
    double reconstruction = 0.0;
    double kl = 0.0;
    double total = 0.0;
};

// Called after each checkpoint epoch (epoch 1, then every checkpoint_every).
using CheckpointFn = std::function<void(const nn::VaeModel&, const optim::AdadeltaState&)>;

// Seeded, deterministic training: per epoch a seeded permutation of the
// pairs, batched ELBO gradients, one Adadelta step per batch. The set must
// already be normalized; its stats are copied into the model.
inline nn::VaeModel train_vae(const dataset::TrainingSet& set, const nn::GaussianPrior& prior,
                              const TrainConfig& config, std::vector<EpochLoss>* loss_log = nullptr,
                              const CheckpointFn& on_checkpoint = nullptr) {
    config.validate();
    if (set.inputs.empty()) throw Error("train: empty training set");
    if (set.inputs.size() != set.targets.size()) {
        throw Error("train: inputs and targets differ in length");
    }

    const std::size_t n = set.inputs.size();
    const std::size_t input_dim = set.inputs.front().size();

    Rng rng(config.seed);
    nn::VaeModel model = nn::make_vae(input_dim, config.hidden_dim, config.latent_dim, prior, rng);
    model.norm = set.norm;
    model.seed = config.seed;

    optim::AdadeltaState state(model.param_count());

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        const std::vector<std::size_t> order = rng.permutation(n);

        double recon_sum = 0.0;
        double kl_sum = 0.0;
        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t count = std::min(config.batch_size, n - start);
            std::vector<Vec> inputs;
            std::vector<Vec> targets;
            std::vector<Vec> noise;
            inputs.reserve(count);
            targets.reserve(count);
            noise.reserve(count);
            for (std::size_t i = 0; i < count; ++i) {
                const std::size_t idx = order[start + i];
                inputs.push_back(set.inputs[idx]);
                targets.push_back(set.targets[idx]);
                Vec eps(config.latent_dim);
                for (double& e : eps) e = prior.mean + prior.std * rng.normal();
                noise.push_back(std::move(eps));
            }

            nn::LossReport report;
            nn::ParamGrads grads;
            try {
                std::tie(report, grads) = nn::elbo_loss(model, inputs, targets, noise);
            } catch (const Error& e) {
                throw Error("training aborted at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(start / config.batch_size + 1) + ": " + e.what());
            }

            Vec params = model.flatten_params();
            optim::adadelta_step(state, params, grads.flatten());
            model.set_params(params);

            recon_sum += report.reconstruction * static_cast<double>(count);
            kl_sum += report.kl * static_cast<double>(count);
        }

        model.epochs_trained = epoch;
        if (loss_log) {
            const double dn = static_cast<double>(n);
            loss_log->push_back(
                EpochLoss{epoch, recon_sum / dn, kl_sum / dn, (recon_sum + kl_sum) / dn});
        }
        if (on_checkpoint && (epoch == 1 || epoch % config.checkpoint_every == 0)) {
            on_checkpoint(model, state);
        }
    }
    return model;
}

}  // namespace beatmotion::train
