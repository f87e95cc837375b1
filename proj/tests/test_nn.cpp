#include <catch_amalgamated.hpp>

#include <cmath>

#include "beatmotion/dataset.hpp"
#include "beatmotion/nn.hpp"
#include "beatmotion/train.hpp"
#include "support/synth.hpp"

using namespace beatmotion;
using nn::Activation;

namespace {

nn::DenseLayer layer_2x2_identity() {
    nn::DenseLayer l = nn::make_dense(2, 2, Activation::Linear);
    l.weights(0, 0) = 1.0;
    l.weights(1, 1) = 1.0;
    return l;
}

}  // namespace

TEST_CASE("dense_forward basics", "[nn]") {
    SECTION("identity weights pass the input through") {
        const Vec out = nn::dense_forward(layer_2x2_identity(), Vec{0.3, -0.7});
        CHECK(out[0] == 0.3);
        CHECK(out[1] == -0.7);
    }
    SECTION("zero weights pass the bias through") {
        nn::DenseLayer l = nn::make_dense(2, 3, Activation::Linear);
        l.biases = {1.0, 2.0};
        const Vec out = nn::dense_forward(l, Vec{9.0, -4.0, 0.5});
        CHECK(out == Vec{1.0, 2.0});
    }
    SECTION("tanh activation") {
        nn::DenseLayer l = nn::make_dense(1, 1, Activation::Tanh);
        l.weights(0, 0) = 2.0;
        const Vec out = nn::dense_forward(l, Vec{0.5});
        CHECK(out[0] == Catch::Approx(std::tanh(1.0)).epsilon(1e-12));
        CHECK(out[0] == Catch::Approx(0.761594).margin(1e-6));
    }
    SECTION("dimension mismatch names expected and actual") {
        nn::DenseLayer l = nn::make_dense(2, 3, Activation::Linear);
        try {
            nn::dense_forward(l, Vec{1.0});
            FAIL("expected DimensionError");
        } catch (const DimensionError& e) {
            const std::string msg = e.what();
            CHECK(msg.find('3') != std::string::npos);
            CHECK(msg.find('1') != std::string::npos);
        }
    }
}

TEST_CASE("dense_backward matches the chain rule on linear layers", "[nn]") {
    nn::DenseLayer l = nn::make_dense(2, 3, Activation::Linear);
    Rng rng(5);
    for (double& w : l.weights.data) w = rng.uniform(-1.0, 1.0);
    for (double& b : l.biases) b = rng.uniform(-1.0, 1.0);
    const Vec x{0.4, -1.1, 0.7};
    const Vec go{2.0, -0.5};

    const nn::DenseGrads g = nn::dense_backward(l, x, go);
    for (std::size_t r = 0; r < 2; ++r) {
        for (std::size_t c = 0; c < 3; ++c) {
            CHECK(g.weights(r, c) == Catch::Approx(go[r] * x[c]));  // grad_output outer input
        }
    }
    CHECK(g.biases == go);
    const Vec wt_go = matvec_transposed(l.weights, go);
    for (std::size_t c = 0; c < 3; ++c) CHECK(g.input[c] == Catch::Approx(wt_go[c]));
}

TEST_CASE("dense_backward at tanh zero point has unit local derivative", "[nn]") {
    nn::DenseLayer l = nn::make_dense(2, 2, Activation::Tanh);
    Rng rng(8);
    for (double& w : l.weights.data) w = rng.uniform(-1.0, 1.0);
    const Vec zero{0.0, 0.0};
    const Vec go{0.3, -0.8};
    const nn::DenseGrads g = nn::dense_backward(l, zero, go);
    const Vec expected = matvec_transposed(l.weights, go);
    CHECK(g.input[0] == Catch::Approx(expected[0]));
    CHECK(g.input[1] == Catch::Approx(expected[1]));
}

TEST_CASE("dense_backward agrees with finite differences on random 4x3 layers", "[nn]") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        Rng rng(seed);
        nn::DenseLayer l = nn::make_dense(4, 3, seed % 2 == 0 ? Activation::Tanh : Activation::Linear);
        for (double& w : l.weights.data) w = rng.uniform(-1.5, 1.5);
        for (double& b : l.biases) b = rng.uniform(-1.0, 1.0);
        Vec x{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        Vec c{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};

        // scalar probe s = c . forward(x); its gradients are dense_backward with grad_output = c
        auto probe = [&](const nn::DenseLayer& layer, const Vec& input) {
            return dot(c, nn::dense_forward(layer, input));
        };
        const nn::DenseGrads g = nn::dense_backward(l, x, c);

        const double h = 1e-5;
        double worst = 0.0;
        for (std::size_t i = 0; i < l.weights.data.size(); ++i) {
            nn::DenseLayer up = l;
            nn::DenseLayer down = l;
            up.weights.data[i] += h;
            down.weights.data[i] -= h;
            const double fd = (probe(up, x) - probe(down, x)) / (2 * h);
            worst = std::max(worst, std::abs(fd - g.weights.data[i]) /
                                        std::max({std::abs(fd), std::abs(g.weights.data[i]), 1e-3}));
        }
        for (std::size_t i = 0; i < x.size(); ++i) {
            Vec up = x;
            Vec down = x;
            up[i] += h;
            down[i] -= h;
            const double fd = (probe(l, up) - probe(l, down)) / (2 * h);
            worst = std::max(worst, std::abs(fd - g.input[i]) /
                                        std::max({std::abs(fd), std::abs(g.input[i]), 1e-3}));
        }
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("encode produces finite two-unit codes and rejects bad input", "[nn]") {
    Rng rng(21);
    const nn::VaeModel model = nn::make_vae(20, 64, 2, nn::GaussianPrior{}, rng);

    Vec x(20);
    for (double& v : x) v = rng.uniform(-2.0, 2.0);
    const nn::LatentCode code = nn::encode(model, x);
    REQUIRE(code.z_mean.size() == 2);
    REQUIRE(code.z_log_sigma.size() == 2);
    CHECK(all_finite(code.z_mean));
    CHECK(all_finite(code.z_log_sigma));

    CHECK_THROWS_AS(nn::encode(model, Vec(7, 0.0)), DimensionError);
    Vec bad = x;
    bad[3] = std::nan("");
    CHECK_THROWS_AS(nn::encode(model, bad), Error);
}

TEST_CASE("zero-initialized model encodes and decodes to zero", "[nn]") {
    nn::VaeModel model;
    model.encoder_hidden = nn::make_dense(8, 4, Activation::Tanh);
    model.enc_mean = nn::make_dense(2, 8, Activation::Linear);
    model.enc_log_sigma = nn::make_dense(2, 8, Activation::Linear);
    model.decoder_hidden = nn::make_dense(8, 2, Activation::Tanh);
    model.decoder_out = nn::make_dense(4, 8, Activation::Linear);
    model.input_dim = 4;
    model.latent_dim = 2;
    model.norm = dataset::NormStats::identity(4);

    const nn::LatentCode code = nn::encode(model, Vec{1.0, -2.0, 3.0, 0.5});
    CHECK(code.z_mean == Vec{0.0, 0.0});
    CHECK(code.z_log_sigma == Vec{0.0, 0.0});
    CHECK(nn::decode(model, Vec{0.7, -0.1}) == Vec(4, 0.0));
}

TEST_CASE("encode and decode are pure", "[nn]") {
    Rng rng(33);
    const nn::VaeModel model = nn::make_vae(6, 10, 2, nn::GaussianPrior{0.2, 1.5}, rng);
    Vec x(6);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    const nn::LatentCode a = nn::encode(model, x);
    const nn::LatentCode b = nn::encode(model, x);
    CHECK(a.z_mean == b.z_mean);
    CHECK(a.z_log_sigma == b.z_log_sigma);
    CHECK(nn::decode(model, a.z_mean) == nn::decode(model, a.z_mean));
}

TEST_CASE("reparameterize follows the injected-noise formula", "[nn]") {
    const nn::GaussianPrior prior{0.7, 2.0};
    SECTION("noise at the prior mean with zero log-sigma shifts by the mean") {
        const nn::LatentCode code{Vec{0.1, -0.4}, Vec{0.0, 0.0}};
        const Vec z = nn::reparameterize(code, Vec{prior.mean, prior.mean}, prior);
        CHECK(z[0] == Catch::Approx(0.1 + 0.7));
        CHECK(z[1] == Catch::Approx(-0.4 + 0.7));
    }
    SECTION("zero noise returns z_mean") {
        const nn::LatentCode code{Vec{1.5, -2.5}, Vec{0.0, 0.0}};
        CHECK(nn::reparameterize(code, Vec{0.0, 0.0}, prior) == Vec{1.5, -2.5});
    }
    SECTION("length mismatch throws") {
        const nn::LatentCode code{Vec{0.0, 0.0}, Vec{0.0, 0.0}};
        CHECK_THROWS_AS(nn::reparameterize(code, Vec{0.0}, prior), DimensionError);
    }
    SECTION("empirical mean over many draws lands on z_mean + prior.mean") {
        const nn::LatentCode code{Vec{0.3, -1.2}, Vec{0.0, 0.0}};
        Rng rng(99);
        const int n = 100000;
        Vec sum(2, 0.0);
        for (int i = 0; i < n; ++i) {
            Vec noise{prior.mean + prior.std * rng.normal(), prior.mean + prior.std * rng.normal()};
            const Vec z = nn::reparameterize(code, noise, prior);
            sum[0] += z[0];
            sum[1] += z[1];
        }
        const double tol = 3.0 * prior.std / std::sqrt(static_cast<double>(n));
        CHECK(std::abs(sum[0] / n - (0.3 + prior.mean)) < tol);
        CHECK(std::abs(sum[1] / n - (-1.2 + prior.mean)) < tol);
    }
}

TEST_CASE("kl_gaussian closed form matches numeric integration", "[nn]") {
    SECTION("identical distributions give zero") {
        const nn::GaussianPrior prior{0.4, 1.7};
        const nn::LatentCode code{Vec{0.4, 0.4}, Vec{2.0 * std::log(1.7), 2.0 * std::log(1.7)}};
        CHECK(nn::kl_gaussian(code, prior) == 0.0);
    }
    SECTION("KL(N(1,1) || N(0,1)) = 0.5") {
        const nn::LatentCode code{Vec{1.0}, Vec{0.0}};
        const double kl = nn::kl_gaussian(code, nn::GaussianPrior{0.0, 1.0});
        CHECK(kl == Catch::Approx(0.5).margin(1e-9));
        CHECK(kl == Catch::Approx(synth::numeric_kl(1.0, 1.0, 0.0, 1.0)).margin(1e-7));
    }
    SECTION("KL(N(0,4) || N(0,1)) = 0.5 (4 - 1 - ln 4)") {
        const nn::LatentCode code{Vec{0.0}, Vec{std::log(4.0)}};
        const double kl = nn::kl_gaussian(code, nn::GaussianPrior{0.0, 1.0});
        CHECK(kl == Catch::Approx(0.806853).margin(1e-6));
        CHECK(kl == Catch::Approx(synth::numeric_kl(0.0, 2.0, 0.0, 1.0)).margin(1e-7));
    }
    SECTION("nonnegative on random inputs, zero only at a matching posterior") {
        Rng rng(17);
        for (int i = 0; i < 50; ++i) {
            const nn::GaussianPrior prior{rng.uniform(-3.0, 3.0), rng.uniform(0.2, 3.0)};
            const nn::LatentCode code{Vec{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)},
                                      Vec{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)}};
            const double kl = nn::kl_gaussian(code, prior);
            CHECK(kl >= 0.0);
            const bool matches = std::abs(code.z_mean[0] - prior.mean) < 1e-12 &&
                                 std::abs(code.z_mean[1] - prior.mean) < 1e-12 &&
                                 std::abs(code.z_log_sigma[0] - 2 * std::log(prior.std)) < 1e-12 &&
                                 std::abs(code.z_log_sigma[1] - 2 * std::log(prior.std)) < 1e-12;
            if (!matches) CHECK(kl > 0.0);

            const nn::LatentCode exact{Vec{prior.mean}, Vec{2.0 * std::log(prior.std)}};
            CHECK(nn::kl_gaussian(exact, prior) < 1e-12);
        }
    }
}

TEST_CASE("elbo_loss is zero for a perfect predictor with a matched posterior", "[nn]") {
    const nn::GaussianPrior prior{-0.3, 1.4};
    const Vec target{0.5, -1.0, 2.0};

    nn::VaeModel model;
    model.encoder_hidden = nn::make_dense(4, 3, Activation::Tanh);
    model.enc_mean = nn::make_dense(1, 4, Activation::Linear);
    model.enc_log_sigma = nn::make_dense(1, 4, Activation::Linear);
    model.decoder_hidden = nn::make_dense(4, 1, Activation::Tanh);
    model.decoder_out = nn::make_dense(3, 4, Activation::Linear);
    model.input_dim = 3;
    model.latent_dim = 1;
    model.prior = prior;
    model.norm = dataset::NormStats::identity(3);
    model.enc_mean.biases = {prior.mean};
    model.enc_log_sigma.biases = {2.0 * std::log(prior.std)};
    model.decoder_out.biases = target;  // decoder emits the target regardless of z

    const auto [report, grads] = nn::elbo_loss(model, {target}, {target}, {Vec{0.0}});
    CHECK(report.reconstruction == Catch::Approx(0.0).margin(1e-18));
    CHECK(report.kl == Catch::Approx(0.0).margin(1e-15));
    CHECK(report.total == report.reconstruction + report.kl);
    (void)grads;
}

TEST_CASE("elbo_loss rejects bad batches", "[nn]") {
    Rng rng(2);
    const nn::VaeModel model = nn::make_vae(4, 6, 2, nn::GaussianPrior{}, rng);
    CHECK_THROWS_AS(nn::elbo_loss(model, {}, {}, {}), Error);
    const std::vector<Vec> xs{Vec(4, 0.1), Vec(4, 0.2)};
    const std::vector<Vec> noise{Vec(2, 0.0), Vec(2, 0.0)};
    CHECK_THROWS_AS(nn::elbo_loss(model, xs, {Vec(4, 0.0)}, noise), DimensionError);
}

TEST_CASE("elbo_loss report satisfies total = reconstruction + kl", "[nn]") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const synth::RandomVaeCase c = synth::random_vae_case(seed);
        const auto [report, grads] = nn::elbo_loss(c.model, c.inputs, c.targets, c.noise);
        CHECK(report.total == report.reconstruction + report.kl);
        CHECK(report.reconstruction >= 0.0);
        CHECK(report.kl >= 0.0);
        (void)grads;
    }
}

TEST_CASE("elbo_loss gradients match central finite differences", "[nn]") {
    for (std::uint64_t seed = 100; seed < 106; ++seed) {
        const synth::RandomVaeCase c = synth::random_vae_case(seed);
        const auto [report, grads] = nn::elbo_loss(c.model, c.inputs, c.targets, c.noise);
        (void)report;
        const Vec analytic = grads.flatten();
        const Vec fd = synth::fd_gradient(c.model, c.inputs, c.targets, c.noise);
        REQUIRE(analytic.size() == fd.size());
        CHECK(synth::max_rel_error(analytic, fd) < 1e-4);
    }
}

TEST_CASE("five epochs of adadelta strictly decrease the loss on a toy set", "[nn]") {
    const auto poses = synth::oscillation_poses(201);
    const auto movements = dataset::build_movements(poses);
    const dataset::TrainingSet set = dataset::normalize(dataset::make_training_pairs(movements));

    train::TrainConfig cfg;
    cfg.epochs = 5;
    cfg.seed = 4242;
    std::vector<train::EpochLoss> log;
    const nn::VaeModel model = train::train_vae(set, nn::GaussianPrior{}, cfg, &log);
    REQUIRE(log.size() == 5);
    for (std::size_t i = 1; i < log.size(); ++i) {
        CHECK(log[i].total < log[i - 1].total);
    }

    SECTION("training reduces prediction error against an untrained model") {
        Rng rng(777);
        const nn::VaeModel fresh = nn::make_vae(20, 64, 2, nn::GaussianPrior{}, rng);
        double trained_mse = 0.0;
        double fresh_mse = 0.0;
        for (std::size_t i = 0; i < set.inputs.size(); ++i) {
            auto mse = [&](const nn::VaeModel& m) {
                const nn::LatentCode code = nn::encode(m, set.inputs[i]);
                const Vec y = nn::decode(m, code.z_mean);  // mean latent path
                double se = 0.0;
                for (std::size_t d = 0; d < y.size(); ++d) {
                    se += (y[d] - set.targets[i][d]) * (y[d] - set.targets[i][d]);
                }
                return se / static_cast<double>(y.size());
            };
            trained_mse += mse(model);
            fresh_mse += mse(fresh);
        }
        CHECK(trained_mse < fresh_mse);
    }

    SECTION("distinct latent points decode to distinct movements") {
        const Vec a = nn::decode(model, Vec{-1.5, 0.5});
        const Vec b = nn::decode(model, Vec{1.5, -0.5});
        double dist = 0.0;
        for (std::size_t d = 0; d < a.size(); ++d) dist += (a[d] - b[d]) * (a[d] - b[d]);
        CHECK(std::sqrt(dist) > 0.0);
    }
}
