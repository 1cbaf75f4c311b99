#include <doctest.h>

#include <cmath>

#include "agan/errors.hpp"
#include "agan/generator.hpp"
#include "agan/losses.hpp"
#include "test_util.hpp"

using namespace agan;

namespace {

// small generator with touched (non-identity) heads for equivalence tests
IafGenerator random_toy_generator(std::uint64_t seed, int stages = 2, int hop = 4,
                                  int n_mels = 2) {
    IafGeneratorConfig cfg;
    cfg.stages = stages;
    cfg.stage.kernel = 2;
    cfg.stage.dilations = {1, 2};
    cfg.stage.residual_channels = 3;
    cfg.stage.skip_channels = 3;
    cfg.stage.cond_channels = 2;
    cfg.upsampler_hidden = 2;
    Rng rng(seed);
    IafGenerator g(cfg, n_mels, hop, rng);
    // zero-built heads give the identity flow; perturb them so the affine
    // parameters actually vary with the input
    std::vector<ParamRef> params;
    g.collect_params("g", params);
    for (auto& p : params)
        for (auto& v : *p.value) v += rng.uniform(-0.3, 0.3);
    return g;
}

}  // namespace

TEST_CASE("freshly built stages are the identity flow") {
    IafGeneratorConfig cfg;
    cfg.stages = 2;
    cfg.stage.dilations = {1, 2, 4};
    cfg.stage.residual_channels = 4;
    cfg.stage.skip_channels = 4;
    cfg.stage.cond_channels = 3;
    cfg.upsampler_hidden = 3;
    Rng rng(21);
    IafGenerator g(cfg, 4, 8, rng);

    Rng zr(22);
    MelSpectrogram mel = testutil::random_mel(4, 4, 8, zr);
    const NoiseSample noise = draw_logistic_noise(32, zr);
    const auto out = g.forward_parallel(noise.z, mel);
    REQUIRE(out.size() == noise.z.size());
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == noise.z[i]);
}

TEST_CASE("output length is frames * hop and mismatches are rejected") {
    IafGenerator g = random_toy_generator(23, 1, 64);
    Rng rng(24);
    MelSpectrogram mel = testutil::random_mel(8, 2, 64, rng);
    const NoiseSample noise = draw_logistic_noise(512, rng);
    CHECK(g.forward_parallel(noise.z, mel).size() == 512);
    const NoiseSample bad = draw_logistic_noise(500, rng);
    CHECK_THROWS_AS(g.forward_parallel(bad.z, mel), ShapeError);
}

TEST_CASE("parallel and sequential forwards agree") {
    for (int inst = 0; inst < 10; ++inst) {
        const std::uint64_t seed = 300 + static_cast<std::uint64_t>(inst);
        IafGenerator g = random_toy_generator(seed);
        Rng rng(seed ^ 0xABCD);
        const int frames = 4 + inst * 4;  // T up to 160
        MelSpectrogram mel = testutil::random_mel(frames, 2, 4, rng);
        const NoiseSample noise = draw_logistic_noise(frames * 4, rng);
        const auto par = g.forward_parallel(noise.z, mel);
        const auto seq = g.forward_sequential(noise.z, mel);
        REQUIRE(par.size() == seq.size());
        double max_err = 0.0;
        for (std::size_t i = 0; i < par.size(); ++i)
            max_err = std::max(max_err, std::abs(par[i] - seq[i]));
        CHECK(max_err <= 1e-6);
    }
}

TEST_CASE("per-stage affine parameters are strictly causal") {
    IafGenerator g = random_toy_generator(31, 1);
    Rng rng(32);
    const int T = 64;
    MelSpectrogram mel = testutil::random_mel(T / 4, 2, 4, rng);
    IafGenerator::Trace tr;
    NoiseSample noise = draw_logistic_noise(T, rng);
    g.forward_parallel(noise.z, mel, &tr);

    std::vector<double> mu0, ls0;
    g.stage(0).affine_params(noise.z, tr.cond, &mu0, &ls0);

    for (int t = 0; t < T; ++t) {
        std::vector<double> z2 = noise.z;
        z2[static_cast<std::size_t>(t)] += 1.5;
        std::vector<double> mu2, ls2;
        g.stage(0).affine_params(z2, tr.cond, &mu2, &ls2);
        // mu_t and sigma_t depend only on z_{<t}: entries at or before t are
        // untouched by a perturbation at t
        for (int u = 0; u <= t; ++u) {
            CHECK(mu2[static_cast<std::size_t>(u)] == mu0[static_cast<std::size_t>(u)]);
            CHECK(ls2[static_cast<std::size_t>(u)] == ls0[static_cast<std::size_t>(u)]);
        }
    }
}

TEST_CASE("end-to-end outputs before a perturbed timestep are unchanged") {
    IafGenerator g = random_toy_generator(33);
    Rng rng(34);
    const int T = 64;
    MelSpectrogram mel = testutil::random_mel(T / 4, 2, 4, rng);
    NoiseSample noise = draw_logistic_noise(T, rng);
    const auto base = g.forward_parallel(noise.z, mel);
    for (int t = 0; t < T; ++t) {
        std::vector<double> z2 = noise.z;
        z2[static_cast<std::size_t>(t)] -= 2.0;
        const auto out = g.forward_parallel(z2, mel);
        for (int u = 0; u < t; ++u)
            CHECK(out[static_cast<std::size_t>(u)] == base[static_cast<std::size_t>(u)]);
    }
}

TEST_CASE("sampling is deterministic per seed and clamped") {
    IafGenerator g = random_toy_generator(35);
    Rng rng(36);
    MelSpectrogram mel = testutil::random_mel(16, 2, 4, rng);
    const Waveform a = g.sample(mel, 99, 8000);
    const Waveform b = g.sample(mel, 99, 8000);
    const Waveform c = g.sample(mel, 100, 8000);
    REQUIRE(a.samples.size() == 64);
    CHECK(a.sample_rate == 8000);
    bool all_eq = true, any_diff = false;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        if (a.samples[i] != b.samples[i]) all_eq = false;
        if (a.samples[i] != c.samples[i]) any_diff = true;
        CHECK(std::abs(a.samples[i]) <= 1.0);
    }
    CHECK(all_eq);
    CHECK(any_diff);
}

TEST_CASE("identity generator sampling reproduces logistic noise statistics") {
    IafGeneratorConfig cfg;
    cfg.stages = 1;
    cfg.stage.dilations = {1};
    cfg.stage.residual_channels = 2;
    cfg.stage.skip_channels = 2;
    cfg.stage.cond_channels = 2;
    cfg.upsampler_hidden = 2;
    Rng rng(37);
    IafGenerator g(cfg, 2, 4, rng);  // zero-built head: identity

    MelSpectrogram mel = testutil::random_mel(4096, 2, 4, rng);
    // unclamped path so the raw draws are visible
    Rng zrng(555);
    const NoiseSample noise = draw_logistic_noise(16384, zrng);
    const auto out = g.forward_parallel(noise.z, mel);

    double mean = 0.0;
    for (double v : out) mean += v;
    mean /= static_cast<double>(out.size());
    // logistic(0,1): variance pi^2/3, stderr = sqrt(var/T)
    const double stderr_mean = std::sqrt((testutil::kPi * testutil::kPi / 3.0) / 16384.0);
    CHECK(std::abs(mean) < 3.0 * stderr_mean);
}

TEST_CASE("receptive field follows 1 + (k-1) * sum(dilations)") {
    IafGeneratorConfig cfg;
    cfg.stages = 1;
    cfg.stage.cond_channels = 2;
    cfg.stage.residual_channels = 2;
    cfg.stage.skip_channels = 2;
    cfg.upsampler_hidden = 2;

    SUBCASE("kernel 2, doubling dilations") {
        cfg.stage.kernel = 2;
        cfg.stage.dilations = {1, 2, 4, 8};
        Rng rng(38);
        IafGenerator g(cfg, 2, 4, rng);
        CHECK(g.receptive_field_per_stage() == 16);
    }
    SUBCASE("kernel 3, dilations 1..10") {
        cfg.stage.kernel = 3;
        cfg.stage.dilations = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
        Rng rng(39);
        IafGenerator g(cfg, 2, 4, rng);
        CHECK(g.receptive_field_per_stage() == 111);
    }
    SUBCASE("single kernel-1 layer") {
        cfg.stage.kernel = 1;
        cfg.stage.dilations = {1};
        Rng rng(40);
        IafGenerator g(cfg, 2, 4, rng);
        CHECK(g.receptive_field_per_stage() == 1);
    }
}

TEST_CASE("generator parameter gradients match finite differences") {
    SpectralConfig loss_cfg;
    loss_cfg.frame_length = 16;
    loss_cfg.hop = 8;
    // a larger log floor keeps the loss surface well-conditioned for the
    // finite-difference probe (near-empty bins otherwise have curvature
    // ~1/eps^2, swamping the central-difference truncation error)
    loss_cfg.eps = 1e-2;

    for (int restart = 0; restart < 3; ++restart) {
        const std::uint64_t seed = 401 + static_cast<std::uint64_t>(restart);
        IafGenerator g = random_toy_generator(seed);
        REQUIRE(g.param_count() < 500);

        Rng rng(seed ^ 0x5555);
        const int frames = 8;
        MelSpectrogram mel = testutil::random_mel(frames, 2, 4, rng);
        const NoiseSample noise = draw_logistic_noise(frames * 4, rng);
        const auto x_ref = testutil::random_signal(frames * 4, rng);

        auto loss = [&]() {
            const auto xp = g.forward_parallel(noise.z, mel);
            return log_mag_loss(x_ref, xp, loss_cfg).value;
        };

        g.zero_grad();
        IafGenerator::Trace tr;
        const auto xp = g.forward_parallel(noise.z, mel, &tr);
        std::vector<double> gxp;
        log_mag_loss_grad(x_ref, xp, loss_cfg, &gxp);
        g.backward(tr, gxp);

        std::vector<ParamRef> params;
        g.collect_params("g", params);
        const auto res = testutil::check_gradients(params, loss, 1e-5);
        CHECK(res.checked == g.param_count());
        CHECK(res.max_rel_err < 1e-3);
    }
}
