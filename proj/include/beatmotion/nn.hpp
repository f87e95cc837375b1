#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <utility>
#include <vector>

#include "beatmotion/linalg.hpp"
#include "beatmotion/norm.hpp"
#include "beatmotion/rng.hpp"

namespace beatmotion::nn {

enum class Activation { Tanh, Linear };

inline const char* activation_name(Activation a) {
    return a == Activation::Tanh ? "tanh" : "linear";
}

struct DenseLayer {
    Matrix weights;  // out_dim x in_dim
    Vec biases;      // out_dim
    Activation activation = Activation::Linear;

    std::size_t in_dim() const { return weights.cols; }
    std::size_t out_dim() const { return weights.rows; }

    bool operator==(const DenseLayer&) const = default;
};

inline DenseLayer make_dense(std::size_t out_dim, std::size_t in_dim, Activation act) {
    return DenseLayer{Matrix(out_dim, in_dim), Vec(out_dim, 0.0), act};
}

// Glorot-uniform weights (±sqrt(6/(fan_in+fan_out))), zero biases.
inline DenseLayer init_dense(std::size_t out_dim, std::size_t in_dim, Activation act, Rng& rng) {
    DenseLayer layer = make_dense(out_dim, in_dim, act);
    const double bound = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
    for (double& w : layer.weights.data) w = rng.uniform(-bound, bound);
    return layer;
}

// Latent prior Normal(mean, std^2), shared across all latent units. During
// training the mean carries the clip's average loudness and the std its
// average segment variance.
struct GaussianPrior {
    double mean = 0.0;
    double std = 1.0;

    bool operator==(const GaussianPrior&) const = default;
};

struct LatentCode {
    Vec z_mean;
    Vec z_log_sigma;  // log-variance, so posterior std = exp(z_log_sigma / 2)
};

struct LossReport {
    double reconstruction = 0.0;
    double kl = 0.0;
    double total = 0.0;
};

struct DenseGrads {
    Vec input;
    Matrix weights;
    Vec biases;
};

struct LayerGrads {
    Matrix weights;
    Vec biases;
};

struct VaeModel {
    DenseLayer encoder_hidden;
    DenseLayer enc_mean;
    DenseLayer enc_log_sigma;
    DenseLayer decoder_hidden;
    DenseLayer decoder_out;

    std::size_t input_dim = 0;
    std::size_t latent_dim = 0;
    GaussianPrior prior;
    dataset::NormStats norm;

    std::uint64_t seed = 0;
    std::size_t epochs_trained = 0;

    std::size_t param_count() const {
        auto layer_count = [](const DenseLayer& l) { return l.weights.data.size() + l.biases.size(); };
        return layer_count(encoder_hidden) + layer_count(enc_mean) + layer_count(enc_log_sigma) +
               layer_count(decoder_hidden) + layer_count(decoder_out);
    }

    // Flattening order: encoder_hidden, enc_mean, enc_log_sigma,
    // decoder_hidden, decoder_out; weights (row-major) before biases.
    Vec flatten_params() const {
        Vec out;
        out.reserve(param_count());
        for (const DenseLayer* l :
             {&encoder_hidden, &enc_mean, &enc_log_sigma, &decoder_hidden, &decoder_out}) {
            out.insert(out.end(), l->weights.data.begin(), l->weights.data.end());
            out.insert(out.end(), l->biases.begin(), l->biases.end());
        }
        return out;
    }

    void set_params(const Vec& flat) {
        require_length(flat, param_count(), "VaeModel::set_params");
        std::size_t pos = 0;
        for (DenseLayer* l :
             {&encoder_hidden, &enc_mean, &enc_log_sigma, &decoder_hidden, &decoder_out}) {
            std::copy(flat.begin() + pos, flat.begin() + pos + l->weights.data.size(),
                      l->weights.data.begin());
            pos += l->weights.data.size();
            std::copy(flat.begin() + pos, flat.begin() + pos + l->biases.size(), l->biases.begin());
            pos += l->biases.size();
        }
    }
};

struct ParamGrads {
    LayerGrads encoder_hidden;
    LayerGrads enc_mean;
    LayerGrads enc_log_sigma;
    LayerGrads decoder_hidden;
    LayerGrads decoder_out;

    static ParamGrads zeros_like(const VaeModel& m) {
        auto z = [](const DenseLayer& l) {
            return LayerGrads{Matrix(l.weights.rows, l.weights.cols), Vec(l.biases.size(), 0.0)};
        };
        return ParamGrads{z(m.encoder_hidden), z(m.enc_mean), z(m.enc_log_sigma),
                          z(m.decoder_hidden), z(m.decoder_out)};
    }

    // Same order as VaeModel::flatten_params.
    Vec flatten() const {
        Vec out;
        for (const LayerGrads* l :
             {&encoder_hidden, &enc_mean, &enc_log_sigma, &decoder_hidden, &decoder_out}) {
            out.insert(out.end(), l->weights.data.begin(), l->weights.data.end());
            out.insert(out.end(), l->biases.begin(), l->biases.end());
        }
        return out;
    }
};

// Encoder 20 -> hidden (tanh) -> two linear heads; decoder latent -> hidden
// (tanh) -> linear output. All sizes are arguments; these are just the
// default shapes for 10-joint pose couples with a 2-unit latent space.
inline VaeModel make_vae(std::size_t input_dim, std::size_t hidden_dim, std::size_t latent_dim,
                         const GaussianPrior& prior, Rng& rng) {
    if (input_dim == 0 || hidden_dim == 0 || latent_dim == 0) {
        throw Error("make_vae: dimensions must be positive");
    }
    if (!(prior.std > 0.0)) throw Error("make_vae: prior std must be positive");
    VaeModel m;
    m.encoder_hidden = init_dense(hidden_dim, input_dim, Activation::Tanh, rng);
    m.enc_mean = init_dense(latent_dim, hidden_dim, Activation::Linear, rng);
    m.enc_log_sigma = init_dense(latent_dim, hidden_dim, Activation::Linear, rng);
    m.decoder_hidden = init_dense(hidden_dim, latent_dim, Activation::Tanh, rng);
    m.decoder_out = init_dense(input_dim, hidden_dim, Activation::Linear, rng);
    m.input_dim = input_dim;
    m.latent_dim = latent_dim;
    m.prior = prior;
    m.norm = dataset::NormStats::identity(input_dim);
    return m;
}

inline Vec dense_forward(const DenseLayer& layer, const Vec& input) {
    require_length(input, layer.in_dim(), "dense_forward input");
    Vec out = matvec(layer.weights, input);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] += layer.biases[i];
        if (layer.activation == Activation::Tanh) out[i] = std::tanh(out[i]);
    }
    return out;
}

// Exact gradients of the layer's forward map. Recomputes the pre-activation
// internally so the function stays pure in (layer, input, grad_output).
inline DenseGrads dense_backward(const DenseLayer& layer, const Vec& input, const Vec& grad_output) {
    require_length(input, layer.in_dim(), "dense_backward input");
    require_length(grad_output, layer.out_dim(), "dense_backward grad_output");

    Vec delta = grad_output;
    if (layer.activation == Activation::Tanh) {
        Vec pre = matvec(layer.weights, input);
        for (std::size_t i = 0; i < pre.size(); ++i) {
            const double t = std::tanh(pre[i] + layer.biases[i]);
            delta[i] *= 1.0 - t * t;
        }
    }

    DenseGrads g{Vec(), Matrix(layer.out_dim(), layer.in_dim()), delta};
    add_outer(g.weights, delta, input);
    g.input = matvec_transposed(layer.weights, delta);
    return g;
}

inline LatentCode encode(const VaeModel& model, const Vec& movement_vec) {
    require_length(movement_vec, model.input_dim, "encode input");
    if (!all_finite(movement_vec)) throw Error("encode: non-finite input rejected");
    const Vec h = dense_forward(model.encoder_hidden, movement_vec);
    return LatentCode{dense_forward(model.enc_mean, h), dense_forward(model.enc_log_sigma, h)};
}

// z_i = z_mean_i + exp(z_log_sigma_i / 2) * noise_i, with noise drawn by the
// caller from Normal(prior.mean, prior.std^2). Injected noise keeps the op
// deterministic.
inline Vec reparameterize(const LatentCode& code, const Vec& noise, const GaussianPrior& prior) {
    require_length(noise, code.z_mean.size(), "reparameterize noise");
    require_length(code.z_log_sigma, code.z_mean.size(), "reparameterize z_log_sigma");
    if (!(prior.std > 0.0)) throw Error("reparameterize: prior std must be positive");
    Vec z(code.z_mean.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        z[i] = code.z_mean[i] + std::exp(code.z_log_sigma[i] / 2.0) * noise[i];
    }
    return z;
}

inline Vec decode(const VaeModel& model, const Vec& z) {
    require_length(z, model.latent_dim, "decode input");
    const Vec h = dense_forward(model.decoder_hidden, z);
    return dense_forward(model.decoder_out, h);
}

// Closed-form KL( N(z_mean, exp(z_log_sigma)) || N(prior.mean, prior.std^2) ),
// summed over latent dimensions. Clamped at zero against rounding.
inline double kl_gaussian(const LatentCode& code, const GaussianPrior& prior) {
    require_length(code.z_log_sigma, code.z_mean.size(), "kl_gaussian z_log_sigma");
    if (!(prior.std > 0.0)) throw Error("kl_gaussian: prior std must be positive");
    const double prior_var = prior.std * prior.std;
    double kl = 0.0;
    for (std::size_t i = 0; i < code.z_mean.size(); ++i) {
        const double var = std::exp(code.z_log_sigma[i]);
        const double dmean = code.z_mean[i] - prior.mean;
        kl += std::log(prior.std) - code.z_log_sigma[i] / 2.0 +
              (var + dmean * dmean) / (2.0 * prior_var) - 0.5;
    }
    return std::max(kl, 0.0);
}

namespace detail {

inline void accumulate(LayerGrads& acc, const DenseGrads& g) {
    for (std::size_t i = 0; i < acc.weights.data.size(); ++i) acc.weights.data[i] += g.weights.data[i];
    for (std::size_t i = 0; i < acc.biases.size(); ++i) acc.biases[i] += g.biases[i];
}

}  // namespace detail

// Batch ELBO loss and its gradients. Targets are the forward-shifted
// movements, so the decoder acts as a next-movement predictor.
// reconstruction = per-dimension MSE averaged over the batch, kl = batch
// mean of kl_gaussian, total = their sum; gradients are of `total`.
inline std::pair<LossReport, ParamGrads> elbo_loss(const VaeModel& model,
                                                   const std::vector<Vec>& input_batch,
                                                   const std::vector<Vec>& target_batch,
                                                   const std::vector<Vec>& noise_batch) {
    if (input_batch.empty()) throw Error("elbo_loss: empty batch");
    if (input_batch.size() != target_batch.size() || input_batch.size() != noise_batch.size()) {
        std::ostringstream os;
        os << "elbo_loss: batch length mismatch (inputs " << input_batch.size() << ", targets "
           << target_batch.size() << ", noise " << noise_batch.size() << ")";
        throw DimensionError(os.str());
    }

    const double batch = static_cast<double>(input_batch.size());
    const double dims = static_cast<double>(model.input_dim);
    const double prior_var = model.prior.std * model.prior.std;

    LossReport report;
    ParamGrads grads = ParamGrads::zeros_like(model);

    for (std::size_t s = 0; s < input_batch.size(); ++s) {
        const Vec& x = input_batch[s];
        const Vec& target = target_batch[s];
        const Vec& noise = noise_batch[s];
        require_length(target, model.input_dim, "elbo_loss target");

        const Vec h = dense_forward(model.encoder_hidden, x);
        const Vec z_mean = dense_forward(model.enc_mean, h);
        const Vec z_log_sigma = dense_forward(model.enc_log_sigma, h);
        const LatentCode code{z_mean, z_log_sigma};
        const Vec z = reparameterize(code, noise, model.prior);
        const Vec h_dec = dense_forward(model.decoder_hidden, z);
        const Vec y = dense_forward(model.decoder_out, h_dec);

        double se = 0.0;
        for (std::size_t d = 0; d < y.size(); ++d) {
            const double diff = y[d] - target[d];
            se += diff * diff;
        }
        report.reconstruction += se / dims / batch;
        report.kl += kl_gaussian(code, model.prior) / batch;

        // d total / dy, with both loss terms already batch-averaged
        Vec grad_y(y.size());
        for (std::size_t d = 0; d < y.size(); ++d) {
            grad_y[d] = 2.0 * (y[d] - target[d]) / dims / batch;
        }

        const DenseGrads g_out = dense_backward(model.decoder_out, h_dec, grad_y);
        detail::accumulate(grads.decoder_out, g_out);
        const DenseGrads g_dec_hidden = dense_backward(model.decoder_hidden, z, g_out.input);
        detail::accumulate(grads.decoder_hidden, g_dec_hidden);
        const Vec& grad_z = g_dec_hidden.input;

        Vec grad_mean(z_mean.size());
        Vec grad_log_sigma(z_mean.size());
        for (std::size_t i = 0; i < z_mean.size(); ++i) {
            const double std_term = std::exp(z_log_sigma[i] / 2.0);
            grad_mean[i] = grad_z[i] + (z_mean[i] - model.prior.mean) / prior_var / batch;
            grad_log_sigma[i] = grad_z[i] * 0.5 * std_term * noise[i] +
                                (-0.5 + std::exp(z_log_sigma[i]) / (2.0 * prior_var)) / batch;
        }

        const DenseGrads g_mean = dense_backward(model.enc_mean, h, grad_mean);
        detail::accumulate(grads.enc_mean, g_mean);
        const DenseGrads g_log_sigma = dense_backward(model.enc_log_sigma, h, grad_log_sigma);
        detail::accumulate(grads.enc_log_sigma, g_log_sigma);

        Vec grad_h = g_mean.input;
        add_scaled(grad_h, g_log_sigma.input);
        detail::accumulate(grads.encoder_hidden, dense_backward(model.encoder_hidden, x, grad_h));
    }

    report.total = report.reconstruction + report.kl;
    if (!std::isfinite(report.total)) {
        throw Error("elbo_loss: non-finite loss (diverged parameters or bad input)");
    }
    return {report, grads};
}

}  // namespace beatmotion::nn
