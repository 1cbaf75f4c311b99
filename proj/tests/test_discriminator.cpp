#include <doctest.h>

#include <cmath>

#include "agan/discriminator.hpp"
#include "agan/errors.hpp"
#include "test_util.hpp"

using namespace agan;

namespace {

DiscriminatorNet toy_disc(std::uint64_t seed, DilationSchedule sched = DilationSchedule::literal,
                          int channels = 2, int hop = 4) {
    DiscriminatorConfig cfg;
    cfg.channels = channels;
    cfg.schedule = sched;
    cfg.cond_channels = 2;
    cfg.upsampler_hidden = 2;
    Rng rng(seed);
    return DiscriminatorNet(cfg, 2, hop, rng);
}

}  // namespace

TEST_CASE("architecture contract: ten dilated layers, kernel 3, leaky slope 0.2") {
    DiscriminatorNet d = toy_disc(50);
    CHECK(d.layer_count() == 10);
    for (int i = 0; i < d.layer_count(); ++i) CHECK(d.kernel_size(i) == 3);
    CHECK(d.leaky_alpha() == 0.2);
    CHECK(d.dilations() == std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10});

    DiscriminatorNet dd = toy_disc(51, DilationSchedule::doubling);
    CHECK(dd.layer_count() == 10);
    CHECK(dd.dilations() == std::vector<int>{1, 2, 4, 8, 16, 32, 64, 128, 256, 512});
}

TEST_CASE("receptive field: literal schedule gives 111 samples") {
    CHECK(toy_disc(52).receptive_field() == 111);
    // all-ones schedule equivalent: 1 + 2*10 = 21 for ten kernel-3 layers
    DiscriminatorNet d = toy_disc(53);
    for (auto& c : d.conv_layers()) c.dilation = 1;
    int sum = 0;
    for (auto& c : d.conv_layers()) sum += c.dilation;
    CHECK(1 + 2 * sum == 21);
    // single kernel-3 layer at dilation 1 spans 3 samples
    CHECK(1 + (3 - 1) * 1 == 3);
}

TEST_CASE("per-timestep scores and pooled mean have the right shape") {
    DiscriminatorNet d = toy_disc(54);
    Rng rng(55);
    MelSpectrogram mel = testutil::random_mel(16, 2, 4, rng);
    const auto x = testutil::random_signal(64, rng);
    const auto s = d.score(x, mel);
    REQUIRE(s.per_timestep.size() == 64);
    double mean = 0.0;
    for (double v : s.per_timestep) mean += v;
    CHECK(s.pooled == doctest::Approx(mean / 64.0).epsilon(1e-12));

    const auto bad = testutil::random_signal(63, rng);
    CHECK_THROWS_AS(d.score(bad, mel), ShapeError);
}

TEST_CASE("zero-weight network scores zero everywhere") {
    DiscriminatorNet d = toy_disc(56);
    std::vector<ParamRef> params;
    d.collect_params("d", params);
    for (auto& p : params)
        for (auto& v : *p.value) v = 0.0;
    Rng rng(57);
    MelSpectrogram mel = testutil::random_mel(8, 2, 4, rng);
    const auto x = testutil::random_signal(32, rng);
    const auto s = d.score(x, mel);
    for (double v : s.per_timestep) CHECK(v == 0.0);
    CHECK(s.pooled == 0.0);
}

TEST_CASE("constant input gives constant interior scores when conditioning is cut") {
    DiscriminatorNet d = toy_disc(58);
    // zero the layer-1 weights that read the condition channels
    Conv1d& first = d.conv_layers()[0];
    for (int oc = 0; oc < first.out_ch; ++oc)
        for (int ic = 1; ic < first.in_ch; ++ic)
            for (int j = 0; j < first.kernel; ++j)
                first.w[(static_cast<std::size_t>(oc) * first.in_ch + ic) * first.kernel + j] = 0.0;

    Rng rng(59);
    MelSpectrogram mel = testutil::random_mel(64, 2, 4, rng);
    std::vector<double> x(256, 0.4);
    const auto s = d.score(x, mel);

    const int half = (d.receptive_field() - 1) / 2;
    const double mid = s.per_timestep[128];
    for (int t = half; t < 256 - half; ++t)
        CHECK(s.per_timestep[static_cast<std::size_t>(t)] == doctest::Approx(mid).epsilon(1e-12));

    // and the score is then independent of the condition entirely
    MelSpectrogram mel2 = testutil::random_mel(64, 2, 4, rng);
    const auto s2 = d.score(x, mel2);
    for (std::size_t t = 0; t < s.per_timestep.size(); ++t)
        CHECK(s2.per_timestep[t] == s.per_timestep[t]);
}

TEST_CASE("per-timestep scores depend only on the receptive field") {
    DiscriminatorNet d = toy_disc(60);
    Rng rng(61);
    MelSpectrogram mel = testutil::random_mel(32, 2, 4, rng);
    auto x = testutil::random_signal(128, rng);
    const auto base = d.score(x, mel);

    const int half = (d.receptive_field() - 1) / 2;
    const int t_perturb = 64;
    x[static_cast<std::size_t>(t_perturb)] += 1.0;
    const auto moved = d.score(x, mel);
    for (int t = 0; t < 128; ++t) {
        if (std::abs(t - t_perturb) > half)
            CHECK(moved.per_timestep[static_cast<std::size_t>(t)] ==
                  base.per_timestep[static_cast<std::size_t>(t)]);
    }
    CHECK(moved.per_timestep[static_cast<std::size_t>(t_perturb)] !=
          base.per_timestep[static_cast<std::size_t>(t_perturb)]);
}

TEST_CASE("scoring is stateless") {
    DiscriminatorNet d = toy_disc(62);
    Rng rng(63);
    MelSpectrogram mel = testutil::random_mel(16, 2, 4, rng);
    const auto a = testutil::random_signal(64, rng);
    const auto b = testutil::random_signal(64, rng);
    const double pa_first = d.score(a, mel).pooled;
    const double pb = d.score(b, mel).pooled;
    const double pa_second = d.score(a, mel).pooled;
    CHECK(pa_first == pa_second);
    CHECK(pa_first != pb);
}

TEST_CASE("input gradient of the pooled score matches finite differences") {
    for (int restart = 0; restart < 3; ++restart) {
        DiscriminatorNet d = toy_disc(70 + static_cast<std::uint64_t>(restart));
        Rng rng(80 + static_cast<std::uint64_t>(restart));
        MelSpectrogram mel = testutil::random_mel(8, 2, 4, rng);
        auto x = testutil::random_signal(32, rng);

        auto loss = [&]() { return d.score(x, mel).pooled; };

        d.zero_grad();
        DiscriminatorNet::Trace tr;
        d.score(x, mel, &tr);
        std::vector<double> g_scores(32, 1.0 / 32.0);  // d(pooled)/d(score_t)
        std::vector<double> gx;
        d.backward(tr, g_scores, &gx);

        // gradients below 1e-6 (vs unit-scale typical entries) are compared
        // absolutely: relative FD precision vanishes with the gradient
        const auto res = testutil::check_vector_gradient(x, gx, loss, 1e-5, 1e-6);
        CHECK(res.max_rel_err < 1e-3);
    }
}

TEST_CASE("discriminator parameter gradients match finite differences") {
    for (int restart = 0; restart < 3; ++restart) {
        DiscriminatorNet d = toy_disc(90 + static_cast<std::uint64_t>(restart));
        REQUIRE(d.param_count() < 500);
        Rng rng(95 + static_cast<std::uint64_t>(restart));
        MelSpectrogram mel = testutil::random_mel(8, 2, 4, rng);
        auto x = testutil::random_signal(32, rng);
        const auto w = testutil::random_signal(32, rng, 1.0);

        auto loss = [&]() {
            const auto s = d.score(x, mel);
            double acc = 0.0;
            for (std::size_t i = 0; i < s.per_timestep.size(); ++i)
                acc += w[i] * s.per_timestep[i];
            return acc;
        };

        d.zero_grad();
        DiscriminatorNet::Trace tr;
        d.score(x, mel, &tr);
        d.backward(tr, w);

        std::vector<ParamRef> params;
        d.collect_params("d", params);
        const auto res = testutil::check_gradients(params, loss, 1e-5, 1e-6);
        CHECK(res.checked == d.param_count());
        CHECK(res.max_rel_err < 1e-3);
    }
}
