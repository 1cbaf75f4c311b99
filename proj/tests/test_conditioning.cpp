#include <doctest.h>

#include <cmath>

#include "agan/conditioning.hpp"
#include "agan/errors.hpp"
#include "test_util.hpp"

using namespace agan;

TEST_CASE("default strides factor the hop, largest first") {
    CHECK(ConditionUpsampler::default_strides(256) == std::array<int, 4>{4, 4, 4, 4});
    CHECK(ConditionUpsampler::default_strides(64) == std::array<int, 4>{4, 4, 2, 2});
    CHECK(ConditionUpsampler::default_strides(16) == std::array<int, 4>{2, 2, 2, 2});
    const auto s = ConditionUpsampler::default_strides(60);
    CHECK(s[0] * s[1] * s[2] * s[3] == 60);
}

TEST_CASE("stride product must equal the hop") {
    Rng rng(1);
    CHECK_THROWS_AS(ConditionUpsampler(80, 8, 4, 256, {4, 4, 4, 2}, rng), ConfigError);
}

TEST_CASE("output length is exactly frames * hop") {
    Rng rng(2);
    SUBCASE("full-scale hop 256") {
        ConditionUpsampler up(80, 8, 4, 256, ConditionUpsampler::default_strides(256), rng);
        MelSpectrogram mel = testutil::random_mel(10, 80, 256, rng);
        const Tensor2 out = up.forward(mel.values);
        CHECK(out.rows == 2560);
        CHECK(out.cols == 4);
    }
    SUBCASE("every frame count from 1 to 64 at desk hop") {
        ConditionUpsampler up(12, 6, 3, 64, ConditionUpsampler::default_strides(64), rng);
        for (int f = 1; f <= 64; ++f) {
            MelSpectrogram mel = testutil::random_mel(f, 12, 64, rng);
            const Tensor2 out = up.forward(mel.values);
            CHECK(out.rows == f * 64);
            CHECK(out.cols == 3);
        }
    }
}

TEST_CASE("forward is a deterministic function of input and parameters") {
    Rng rng(3);
    ConditionUpsampler up(8, 6, 3, 16, ConditionUpsampler::default_strides(16), rng);
    MelSpectrogram mel = testutil::random_mel(5, 8, 16, rng);
    const Tensor2 a = up.forward(mel.values);
    const Tensor2 b = up.forward(mel.values);
    REQUIRE(a.v.size() == b.v.size());
    for (std::size_t i = 0; i < a.v.size(); ++i) CHECK(a.v[i] == b.v[i]);
}

TEST_CASE("nearest-repeat identity maps constant input to constant output") {
    // single channel; per layer, weight 1 on taps j in [s/2, 3s/2), 0
    // elsewhere, keeps exactly one contribution per output sample
    Rng rng(4);
    ConditionUpsampler up(1, 1, 1, 16, ConditionUpsampler::default_strides(16), rng);
    for (auto& layer : up.layers()) {
        std::fill(layer.b.begin(), layer.b.end(), 0.0);
        for (int j = 0; j < layer.kernel; ++j)
            layer.w[static_cast<std::size_t>(j)] =
                (j >= layer.stride / 2 && j < layer.stride / 2 + layer.stride) ? 1.0 : 0.0;
    }
    MelSpectrogram mel;
    mel.values = Tensor2(6, 1);
    mel.values.fill(0.73);
    const Tensor2 out = up.forward(mel.values);
    REQUIRE(out.rows == 96);
    for (int t = 0; t < out.rows; ++t) CHECK(out.at(t, 0) == doctest::Approx(0.73).epsilon(1e-12));
}

TEST_CASE("upsampler gradients match central finite differences") {
    for (int restart = 0; restart < 5; ++restart) {
        Rng rng(100 + static_cast<std::uint64_t>(restart));
        ConditionUpsampler up(3, 4, 2, 8, ConditionUpsampler::default_strides(8), rng);
        MelSpectrogram mel = testutil::random_mel(4, 3, 8, rng);

        // scalar readout: weighted sum of outputs
        Tensor2 weights(32, 2);
        for (auto& v : weights.v) v = rng.uniform(-1.0, 1.0);

        auto loss = [&]() {
            const Tensor2 out = up.forward(mel.values);
            double acc = 0.0;
            for (std::size_t i = 0; i < out.v.size(); ++i) acc += out.v[i] * weights.v[i];
            return acc;
        };

        up.zero_grad();
        ConditionUpsampler::Trace tr;
        const Tensor2 out = up.forward(mel.values, &tr);
        REQUIRE(out.rows == 32);
        up.backward(tr, weights);

        std::vector<ParamRef> params;
        up.collect_params("up", params);
        const auto res = testutil::check_gradients(params, loss, 1e-5);
        CHECK(res.checked == up.param_count());
        CHECK(res.max_rel_err < 1e-4);
    }
}

TEST_CASE("backward also produces the mel-input gradient") {
    Rng rng(5);
    ConditionUpsampler up(2, 3, 2, 8, ConditionUpsampler::default_strides(8), rng);
    MelSpectrogram mel = testutil::random_mel(3, 2, 8, rng);
    Tensor2 weights(24, 2);
    for (auto& v : weights.v) v = rng.uniform(-1.0, 1.0);

    auto loss = [&]() {
        const Tensor2 out = up.forward(mel.values);
        double acc = 0.0;
        for (std::size_t i = 0; i < out.v.size(); ++i) acc += out.v[i] * weights.v[i];
        return acc;
    };

    up.zero_grad();
    ConditionUpsampler::Trace tr;
    up.forward(mel.values, &tr);
    Tensor2 gmel(3, 2);
    up.backward(tr, weights, &gmel);

    std::vector<double> analytic(gmel.v.begin(), gmel.v.end());
    const auto res = testutil::check_vector_gradient(mel.values.v, analytic, loss, 1e-5);
    CHECK(res.max_rel_err < 1e-4);
}
