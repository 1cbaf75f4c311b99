#include "agan/generator.hpp"

#include <cmath>

#include "agan/errors.hpp"

namespace agan {

namespace {

double sigmoid(double x) {
    return 1.0 / (1.0 + std::exp(-x));
}

}  // namespace

NoiseSample draw_logistic_noise(int length, Rng& rng) {
    NoiseSample n;
    n.z.resize(static_cast<std::size_t>(length));
    for (auto& v : n.z) v = rng.logistic();
    return n;
}

std::vector<int> IafGeneratorConfig::doubling_dilations(int layers) {
    std::vector<int> d(static_cast<std::size_t>(layers));
    int v = 1;
    for (auto& x : d) {
        x = v;
        v *= 2;
    }
    return d;
}

FlowStage::FlowStage(const FlowStageConfig& cfg, Rng& rng) : cfg_(cfg) {
    if (cfg.dilations.empty()) throw ConfigError("FlowStage: need at least one dilated layer");
    if (cfg.logscale_clamp <= 0.0) throw ConfigError("FlowStage: logscale_clamp must be positive");
    const int R = cfg.residual_channels;
    const int S = cfg.skip_channels;
    const int C = cfg.cond_channels;
    in_proj_ = Conv1d(1, R, 1, 1, Conv1d::Pad::causal);
    in_proj_.init_uniform(rng);
    for (int d : cfg.dilations) {
        GatedLayer l;
        l.dil = Conv1d(R, 2 * R, cfg.kernel, d, Conv1d::Pad::causal);
        l.dil.init_uniform(rng);
        l.cond = Conv1d(C, 2 * R, 1, 1, Conv1d::Pad::causal, /*has_bias=*/false);
        l.cond.init_uniform(rng);
        l.res = Conv1d(R, R, 1, 1, Conv1d::Pad::causal);
        l.res.init_uniform(rng);
        l.skip = Conv1d(R, S, 1, 1, Conv1d::Pad::causal);
        l.skip.init_uniform(rng);
        layers_.push_back(std::move(l));
    }
    head1_ = Conv1d(S, S, 1, 1, Conv1d::Pad::causal);
    head1_.init_uniform(rng);
    head2_ = Conv1d(S, 2, 1, 1, Conv1d::Pad::causal);
    head2_.init_zero();  // identity flow at construction
}

std::vector<double> FlowStage::forward(std::span<const double> z, const Tensor2& cond,
                                       Trace* trace) const {
    const int T = static_cast<int>(z.size());
    if (cond.rows != T) throw ShapeError("FlowStage: condition length mismatch");
    if (cond.cols != cfg_.cond_channels) throw ShapeError("FlowStage: condition channel mismatch");
    const int R = cfg_.residual_channels;

    Tensor2 xshift(T, 1);
    for (int t = 1; t < T; ++t) xshift.at(t, 0) = z[static_cast<std::size_t>(t - 1)];

    Tensor2 h = in_proj_.forward(xshift);
    Tensor2 skipsum(T, cfg_.skip_channels);

    if (trace) {
        Tensor2 zs(T, 1);
        for (int t = 0; t < T; ++t) zs.at(t, 0) = z[static_cast<std::size_t>(t)];
        trace->z = std::move(zs);
        trace->xshift = std::move(xshift);
        trace->h.clear();
        trace->u.clear();
        trace->act.clear();
    }

    for (const auto& l : layers_) {
        if (trace) trace->h.push_back(h);
        Tensor2 u = l.dil.forward(h);
        const Tensor2 cu = l.cond.forward(cond);
        for (std::size_t i = 0; i < u.v.size(); ++i) u.v[i] += cu.v[i];
        Tensor2 act(T, R);
        for (int t = 0; t < T; ++t) {
            const double* ur = u.row(t);
            double* ar = act.row(t);
            for (int c = 0; c < R; ++c) ar[c] = std::tanh(ur[c]) * sigmoid(ur[R + c]);
        }
        const Tensor2 res = l.res.forward(act);
        const Tensor2 skip = l.skip.forward(act);
        for (std::size_t i = 0; i < h.v.size(); ++i) h.v[i] += res.v[i];
        for (std::size_t i = 0; i < skipsum.v.size(); ++i) skipsum.v[i] += skip.v[i];
        if (trace) {
            trace->u.push_back(std::move(u));
            trace->act.push_back(std::move(act));
        }
    }

    Tensor2 r1 = skipsum;
    for (auto& v : r1.v) v = std::max(v, 0.0);
    Tensor2 p1 = head1_.forward(r1);
    Tensor2 r2 = p1;
    for (auto& v : r2.v) v = std::max(v, 0.0);
    const Tensor2 mu_ls = head2_.forward(r2);

    std::vector<double> out(static_cast<std::size_t>(T));
    std::vector<double> sigma(static_cast<std::size_t>(T));
    const double clamp = cfg_.logscale_clamp;
    for (int t = 0; t < T; ++t) {
        const double ls = std::clamp(mu_ls.at(t, 1), -clamp, clamp);
        const double sg = std::exp(ls);
        sigma[static_cast<std::size_t>(t)] = sg;
        out[static_cast<std::size_t>(t)] = z[static_cast<std::size_t>(t)] * sg + mu_ls.at(t, 0);
    }
    if (trace) {
        trace->skipsum = std::move(skipsum);
        trace->p1 = std::move(p1);
        trace->mu_ls = mu_ls;
        trace->sigma = std::move(sigma);
    }
    return out;
}

void FlowStage::affine_params(std::span<const double> z, const Tensor2& cond,
                              std::vector<double>* mu, std::vector<double>* log_sigma) const {
    Trace tr;
    forward(z, cond, &tr);
    const int T = static_cast<int>(z.size());
    if (mu) {
        mu->resize(static_cast<std::size_t>(T));
        for (int t = 0; t < T; ++t) (*mu)[static_cast<std::size_t>(t)] = tr.mu_ls.at(t, 0);
    }
    if (log_sigma) {
        log_sigma->resize(static_cast<std::size_t>(T));
        for (int t = 0; t < T; ++t)
            (*log_sigma)[static_cast<std::size_t>(t)] =
                std::clamp(tr.mu_ls.at(t, 1), -cfg_.logscale_clamp, cfg_.logscale_clamp);
    }
}

std::vector<double> FlowStage::backward(const Trace& tr, std::span<const double> gout,
                                        const Tensor2& cond, Tensor2* gcond) {
    const int T = tr.z.rows;
    if (static_cast<int>(gout.size()) != T) throw ShapeError("FlowStage: gout length mismatch");
    const int R = cfg_.residual_channels;
    const double clamp = cfg_.logscale_clamp;

    // affine transform: out = z * sigma + mu, sigma = exp(clamp(ls))
    Tensor2 g_mu_ls(T, 2);
    std::vector<double> gz(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {
        const double g = gout[static_cast<std::size_t>(t)];
        const double sg = tr.sigma[static_cast<std::size_t>(t)];
        const double raw = tr.mu_ls.at(t, 1);
        g_mu_ls.at(t, 0) = g;
        g_mu_ls.at(t, 1) = (raw > -clamp && raw < clamp) ? g * tr.z.at(t, 0) * sg : 0.0;
        gz[static_cast<std::size_t>(t)] = g * sg;
    }

    // head
    Tensor2 r2 = tr.p1;
    for (auto& v : r2.v) v = std::max(v, 0.0);
    Tensor2 g_r2(T, head1_.out_ch);
    head2_.backward(r2, g_mu_ls, &g_r2);
    Tensor2 g_p1 = g_r2;
    for (std::size_t i = 0; i < g_p1.v.size(); ++i)
        if (tr.p1.v[i] <= 0.0) g_p1.v[i] = 0.0;
    Tensor2 r1 = tr.skipsum;
    for (auto& v : r1.v) v = std::max(v, 0.0);
    Tensor2 g_r1(T, head1_.in_ch);
    head1_.backward(r1, g_p1, &g_r1);
    Tensor2 g_skipsum = g_r1;
    for (std::size_t i = 0; i < g_skipsum.v.size(); ++i)
        if (tr.skipsum.v[i] <= 0.0) g_skipsum.v[i] = 0.0;

    // gated stack, reversed; g_h tracks the gradient at the residual stream
    // entering the next layer (the final stream is unused by the head)
    Tensor2 g_h(T, R);
    for (int li = static_cast<int>(layers_.size()) - 1; li >= 0; --li) {
        auto& l = layers_[static_cast<std::size_t>(li)];
        const Tensor2& act = tr.act[static_cast<std::size_t>(li)];
        const Tensor2& u = tr.u[static_cast<std::size_t>(li)];
        Tensor2 g_act(T, R);
        l.skip.backward(act, g_skipsum, &g_act);
        l.res.backward(act, g_h, &g_act);
        Tensor2 g_u(T, 2 * R);
        for (int t = 0; t < T; ++t) {
            const double* ur = u.row(t);
            const double* gar = g_act.row(t);
            double* gur = g_u.row(t);
            for (int c = 0; c < R; ++c) {
                const double th = std::tanh(ur[c]);
                const double sg = sigmoid(ur[R + c]);
                gur[c] = gar[c] * sg * (1.0 - th * th);
                gur[R + c] = gar[c] * th * sg * (1.0 - sg);
            }
        }
        l.cond.backward(cond, g_u, gcond);
        l.dil.backward(tr.h[static_cast<std::size_t>(li)], g_u, &g_h);
    }

    Tensor2 g_xshift(T, 1);
    in_proj_.backward(tr.xshift, g_h, &g_xshift);
    for (int t = 0; t + 1 < T; ++t) gz[static_cast<std::size_t>(t)] += g_xshift.at(t + 1, 0);
    return gz;
}

int FlowStage::receptive_field() const {
    int sum = 0;
    for (int d : cfg_.dilations) sum += d;
    return 1 + (cfg_.kernel - 1) * sum;
}

void FlowStage::zero_grad() {
    in_proj_.zero_grad();
    for (auto& l : layers_) {
        l.dil.zero_grad();
        l.cond.zero_grad();
        l.res.zero_grad();
        l.skip.zero_grad();
    }
    head1_.zero_grad();
    head2_.zero_grad();
}

void FlowStage::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    in_proj_.collect_params(param_join(prefix, "in"), out);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const std::string lp = param_join(prefix, "l" + std::to_string(i));
        layers_[i].dil.collect_params(lp + ".dil", out);
        layers_[i].cond.collect_params(lp + ".cond", out);
        layers_[i].res.collect_params(lp + ".res", out);
        layers_[i].skip.collect_params(lp + ".skip", out);
    }
    head1_.collect_params(param_join(prefix, "head1"), out);
    head2_.collect_params(param_join(prefix, "head2"), out);
}

int FlowStage::param_count() const {
    int n = in_proj_.param_count() + head1_.param_count() + head2_.param_count();
    for (const auto& l : layers_)
        n += l.dil.param_count() + l.cond.param_count() + l.res.param_count() +
             l.skip.param_count();
    return n;
}

IafGenerator::IafGenerator(const IafGeneratorConfig& cfg, int n_mels, int hop, Rng& rng)
    : cfg_(cfg) {
    if (cfg.stages < 1) throw ConfigError("IafGenerator: need at least one stage");
    upsampler_ = ConditionUpsampler(n_mels, cfg.upsampler_hidden, cfg.stage.cond_channels, hop,
                                    ConditionUpsampler::default_strides(hop), rng);
    for (int s = 0; s < cfg.stages; ++s) stages_.emplace_back(cfg.stage, rng);
}

std::vector<double> IafGenerator::forward_parallel(std::span<const double> z,
                                                   const MelSpectrogram& mel,
                                                   Trace* trace) const {
    const int T = mel.frames() * upsampler_.hop();
    if (static_cast<int>(z.size()) != T)
        throw ShapeError("IafGenerator: noise length " + std::to_string(z.size()) +
                         " != frames*hop " + std::to_string(T));

    Trace local;
    Trace& tr = trace ? *trace : local;
    tr.cond = upsampler_.forward(mel.values, trace ? &tr.up : nullptr);
    tr.stages.resize(stages_.size());

    std::vector<double> x(z.begin(), z.end());
    for (std::size_t s = 0; s < stages_.size(); ++s)
        x = stages_[s].forward(x, tr.cond, trace ? &tr.stages[s] : nullptr);
    return x;
}

// Naive timestep-at-a-time evaluation, independent of Conv1d::forward: for
// each t the full stack is re-run on the prefix z_{<=t} with direct loops.
std::vector<double> IafGenerator::forward_sequential(std::span<const double> z,
                                                     const MelSpectrogram& mel) const {
    const int T = mel.frames() * upsampler_.hop();
    if (static_cast<int>(z.size()) != T)
        throw ShapeError("IafGenerator: noise length mismatch");
    const Tensor2 cond = upsampler_.forward(mel.values);

    std::vector<double> x(z.begin(), z.end());
    for (const FlowStage& st : stages_) {
        const FlowStageConfig& c = st.cfg_;
        const int R = c.residual_channels;
        const int S = c.skip_channels;
        const int K = c.kernel;
        const int L = static_cast<int>(c.dilations.size());
        std::vector<double> y(static_cast<std::size_t>(T));
        for (int t = 0; t < T; ++t) {
            const int P = t + 1;  // prefix length
            // shifted prefix
            std::vector<double> xs(static_cast<std::size_t>(P), 0.0);
            for (int i = 1; i < P; ++i) xs[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i - 1)];
            // input projection
            std::vector<std::vector<double>> h(static_cast<std::size_t>(P),
                                               std::vector<double>(static_cast<std::size_t>(R)));
            for (int i = 0; i < P; ++i)
                for (int r = 0; r < R; ++r)
                    h[static_cast<std::size_t>(i)][static_cast<std::size_t>(r)] =
                        st.in_proj_.w[static_cast<std::size_t>(r)] * xs[static_cast<std::size_t>(i)] +
                        st.in_proj_.b[static_cast<std::size_t>(r)];
            std::vector<std::vector<double>> skip(static_cast<std::size_t>(P),
                                                  std::vector<double>(static_cast<std::size_t>(S), 0.0));
            for (int li = 0; li < L; ++li) {
                const auto& lay = st.layers_[static_cast<std::size_t>(li)];
                const int d = c.dilations[static_cast<std::size_t>(li)];
                std::vector<std::vector<double>> hn(static_cast<std::size_t>(P),
                                                    std::vector<double>(static_cast<std::size_t>(R)));
                for (int i = 0; i < P; ++i) {
                    for (int oc = 0; oc < 2 * R; ++oc) {
                        double u = lay.dil.b[static_cast<std::size_t>(oc)];
                        for (int j = 0; j < K; ++j) {
                            const int src = i - (K - 1 - j) * d;
                            if (src < 0) continue;
                            for (int ic = 0; ic < R; ++ic)
                                u += lay.dil.w[(static_cast<std::size_t>(oc) * R + ic) * K + j] *
                                     h[static_cast<std::size_t>(src)][static_cast<std::size_t>(ic)];
                        }
                        for (int ic = 0; ic < c.cond_channels; ++ic)
                            u += lay.cond.w[(static_cast<std::size_t>(oc) * c.cond_channels + ic)] *
                                 cond.at(i, ic);
                        // stash gate pre-activations pairwise
                        if (oc < R) {
                            hn[static_cast<std::size_t>(i)][static_cast<std::size_t>(oc)] = u;
                        } else {
                            const int r = oc - R;
                            const double a = hn[static_cast<std::size_t>(i)][static_cast<std::size_t>(r)];
                            hn[static_cast<std::size_t>(i)][static_cast<std::size_t>(r)] =
                                std::tanh(a) * sigmoid(u);
                        }
                    }
                }
                for (int i = 0; i < P; ++i) {
                    for (int sc = 0; sc < S; ++sc) {
                        double acc = lay.skip.b[static_cast<std::size_t>(sc)];
                        for (int ic = 0; ic < R; ++ic)
                            acc += lay.skip.w[static_cast<std::size_t>(sc) * R + ic] *
                                   hn[static_cast<std::size_t>(i)][static_cast<std::size_t>(ic)];
                        skip[static_cast<std::size_t>(i)][static_cast<std::size_t>(sc)] += acc;
                    }
                    for (int rc = 0; rc < R; ++rc) {
                        double acc = lay.res.b[static_cast<std::size_t>(rc)];
                        for (int ic = 0; ic < R; ++ic)
                            acc += lay.res.w[static_cast<std::size_t>(rc) * R + ic] *
                                   hn[static_cast<std::size_t>(i)][static_cast<std::size_t>(ic)];
                        h[static_cast<std::size_t>(i)][static_cast<std::size_t>(rc)] += acc;
                    }
                }
            }
            // head at position t only
            std::vector<double> r1(static_cast<std::size_t>(S));
            for (int sc = 0; sc < S; ++sc)
                r1[static_cast<std::size_t>(sc)] =
                    std::max(skip[static_cast<std::size_t>(t)][static_cast<std::size_t>(sc)], 0.0);
            std::vector<double> p1(static_cast<std::size_t>(S));
            for (int oc = 0; oc < S; ++oc) {
                double acc = st.head1_.b[static_cast<std::size_t>(oc)];
                for (int ic = 0; ic < S; ++ic)
                    acc += st.head1_.w[static_cast<std::size_t>(oc) * S + ic] *
                           r1[static_cast<std::size_t>(ic)];
                p1[static_cast<std::size_t>(oc)] = std::max(acc, 0.0);
            }
            double mu = st.head2_.b[0];
            double ls = st.head2_.b[1];
            for (int ic = 0; ic < S; ++ic) {
                mu += st.head2_.w[static_cast<std::size_t>(ic)] * p1[static_cast<std::size_t>(ic)];
                ls += st.head2_.w[static_cast<std::size_t>(S + ic)] * p1[static_cast<std::size_t>(ic)];
            }
            ls = std::clamp(ls, -c.logscale_clamp, c.logscale_clamp);
            y[static_cast<std::size_t>(t)] = x[static_cast<std::size_t>(t)] * std::exp(ls) + mu;
        }
        x = std::move(y);
    }
    return x;
}

Waveform IafGenerator::sample(const MelSpectrogram& mel, std::uint64_t seed,
                              int sample_rate) const {
    if (mel.frames() < 1) throw DataError("IafGenerator::sample: empty mel input");
    const int T = mel.frames() * upsampler_.hop();
    Rng rng(seed);
    const NoiseSample noise = draw_logistic_noise(T, rng);
    std::vector<double> x = forward_parallel(noise.z, mel);
    for (auto& v : x) v = std::clamp(v, -1.0, 1.0);
    Waveform w;
    w.samples = std::move(x);
    w.sample_rate = sample_rate;
    return w;
}

void IafGenerator::backward(const Trace& tr, std::span<const double> gout) {
    std::vector<double> g(gout.begin(), gout.end());
    Tensor2 gcond(tr.cond.rows, tr.cond.cols);
    for (int s = static_cast<int>(stages_.size()) - 1; s >= 0; --s)
        g = stages_[static_cast<std::size_t>(s)].backward(tr.stages[static_cast<std::size_t>(s)], g,
                                                          tr.cond, &gcond);
    upsampler_.backward(tr.up, gcond);
}

int IafGenerator::receptive_field_per_stage() const {
    return stages_.front().receptive_field();
}

void IafGenerator::zero_grad() {
    upsampler_.zero_grad();
    for (auto& s : stages_) s.zero_grad();
}

void IafGenerator::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    upsampler_.collect_params(param_join(prefix, "upsampler"), out);
    for (std::size_t i = 0; i < stages_.size(); ++i)
        stages_[i].collect_params(param_join(prefix, "stage" + std::to_string(i)), out);
}

int IafGenerator::param_count() const {
    int n = upsampler_.param_count();
    for (const auto& s : stages_) n += s.param_count();
    return n;
}

}  // namespace agan
