#include "agan/discriminator.hpp"

#include "agan/errors.hpp"

namespace agan {

DilationSchedule dilation_schedule_from_string(const std::string& s) {
    if (s == "literal") return DilationSchedule::literal;
    if (s == "doubling") return DilationSchedule::doubling;
    throw ConfigError("unknown dilation schedule: " + s);
}

std::string dilation_schedule_to_string(DilationSchedule s) {
    return s == DilationSchedule::literal ? "literal" : "doubling";
}

DiscriminatorNet::DiscriminatorNet(const DiscriminatorConfig& cfg, int n_mels, int hop, Rng& rng)
    : cfg_(cfg) {
    if (cfg.channels < 1) throw ConfigError("DiscriminatorNet: channels must be >= 1");
    upsampler_ = ConditionUpsampler(n_mels, cfg.upsampler_hidden, cfg.cond_channels, hop,
                                    ConditionUpsampler::default_strides(hop), rng);
    dilations_.resize(kLayers);
    for (int i = 0; i < kLayers; ++i)
        dilations_[static_cast<std::size_t>(i)] =
            cfg.schedule == DilationSchedule::literal ? i + 1 : (1 << i);

    int in_ch = 1 + cfg.cond_channels;
    for (int i = 0; i < kLayers; ++i) {
        convs_.emplace_back(in_ch, cfg.channels, kKernel, dilations_[static_cast<std::size_t>(i)],
                            Conv1d::Pad::same);
        convs_.back().init_uniform(rng);
        in_ch = cfg.channels;
    }
    out_ = Conv1d(cfg.channels, 1, 1, 1, Conv1d::Pad::same);
    out_.init_uniform(rng);
}

DiscriminatorNet::Score DiscriminatorNet::score(std::span<const double> x,
                                                const MelSpectrogram& mel, Trace* trace) const {
    const int T = mel.frames() * upsampler_.hop();
    if (static_cast<int>(x.size()) != T)
        throw ShapeError("DiscriminatorNet: waveform length " + std::to_string(x.size()) +
                         " != frames*hop " + std::to_string(T));

    Tensor2 cond = upsampler_.forward(mel.values, trace ? &trace->up : nullptr);

    Tensor2 input(T, 1 + cfg_.cond_channels);
    for (int t = 0; t < T; ++t) {
        double* row = input.row(t);
        row[0] = x[static_cast<std::size_t>(t)];
        const double* cr = cond.row(t);
        for (int c = 0; c < cfg_.cond_channels; ++c) row[1 + c] = cr[c];
    }
    if (trace) {
        trace->cond = std::move(cond);
        trace->pre.clear();
        trace->input = input;
    }

    Tensor2 h = std::move(input);
    for (const auto& conv : convs_) {
        Tensor2 pre = conv.forward(h);
        h = pre;
        for (auto& v : h.v)
            if (v < 0.0) v *= kLeakyAlpha;
        if (trace) trace->pre.push_back(std::move(pre));
    }
    if (trace) trace->last = h;

    const Tensor2 s = out_.forward(h);
    Score sc;
    sc.per_timestep.resize(static_cast<std::size_t>(T));
    double acc = 0.0;
    for (int t = 0; t < T; ++t) {
        sc.per_timestep[static_cast<std::size_t>(t)] = s.at(t, 0);
        acc += s.at(t, 0);
    }
    sc.pooled = acc / T;
    return sc;
}

void DiscriminatorNet::backward(const Trace& tr, std::span<const double> g_scores,
                                std::vector<double>* gx) {
    const int T = tr.input.rows;
    if (static_cast<int>(g_scores.size()) != T)
        throw ShapeError("DiscriminatorNet: score gradient length mismatch");

    Tensor2 gs(T, 1);
    for (int t = 0; t < T; ++t) gs.at(t, 0) = g_scores[static_cast<std::size_t>(t)];

    Tensor2 g_h(T, cfg_.channels);
    out_.backward(tr.last, gs, &g_h);

    for (int i = kLayers - 1; i >= 0; --i) {
        const Tensor2& pre = tr.pre[static_cast<std::size_t>(i)];
        for (std::size_t k = 0; k < g_h.v.size(); ++k)
            if (pre.v[k] < 0.0) g_h.v[k] *= kLeakyAlpha;
        // post-activation input of this layer
        const Tensor2* in;
        Tensor2 act;
        if (i == 0) {
            in = &tr.input;
        } else {
            act = tr.pre[static_cast<std::size_t>(i - 1)];
            for (auto& v : act.v)
                if (v < 0.0) v *= kLeakyAlpha;
            in = &act;
        }
        Tensor2 g_in(in->rows, in->cols);
        convs_[static_cast<std::size_t>(i)].backward(*in, g_h, &g_in);
        g_h = std::move(g_in);
    }

    // g_h is now the gradient at the concatenated input
    if (gx) {
        gx->assign(static_cast<std::size_t>(T), 0.0);
        for (int t = 0; t < T; ++t) (*gx)[static_cast<std::size_t>(t)] = g_h.at(t, 0);
    }
    Tensor2 g_cond(T, cfg_.cond_channels);
    for (int t = 0; t < T; ++t)
        for (int c = 0; c < cfg_.cond_channels; ++c) g_cond.at(t, c) = g_h.at(t, 1 + c);
    upsampler_.backward(tr.up, g_cond);
}

int DiscriminatorNet::receptive_field() const {
    int sum = 0;
    for (int d : dilations_) sum += d;
    return 1 + (kKernel - 1) * sum;
}

void DiscriminatorNet::zero_grad() {
    upsampler_.zero_grad();
    for (auto& c : convs_) c.zero_grad();
    out_.zero_grad();
}

void DiscriminatorNet::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    upsampler_.collect_params(param_join(prefix, "upsampler"), out);
    for (std::size_t i = 0; i < convs_.size(); ++i)
        convs_[i].collect_params(param_join(prefix, "l" + std::to_string(i)), out);
    out_.collect_params(param_join(prefix, "out"), out);
}

int DiscriminatorNet::param_count() const {
    int n = upsampler_.param_count() + out_.param_count();
    for (const auto& c : convs_) n += c.param_count();
    return n;
}

}  // namespace agan
