#include "agan/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "agan/errors.hpp"

namespace agan {

namespace {

constexpr std::uint64_t kTrainStream = 0x7261696E;  // batch/noise draws
constexpr std::uint64_t kEvalStream = 0x6576616C;   // held-out sampling

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// effective crop cap, rounded down to a hop multiple
long effective_max_len(const SpectralConfig& scfg, const TrainingConfig& cfg) {
    return (cfg.max_sample_len / scfg.hop) * scfg.hop;
}

// shortest crop that still yields one full loss frame: frames*hop >= frame_length
long min_crop_len(const SpectralConfig& scfg) {
    return 2L * scfg.frame_length - scfg.hop;
}

std::vector<double> scaled(const std::vector<double>& v, double s) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * s;
    return out;
}

double mean_of(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

}  // namespace

void TrainingConfig::validate() const {
    if (lambda_adv < 0.0) throw ConfigError("lambda_adv must be >= 0");
    if (lr_g <= 0.0 || lr_d <= 0.0) throw ConfigError("learning rates must be positive");
    if (warmup_steps < 1) throw ConfigError("warmup_steps must be >= 1");
    if (pretrain_steps < 1) throw ConfigError("pretrain_steps must be >= 1");
    if (freeze_g_steps < 0 || joint_steps < 0)
        throw ConfigError("phase lengths must be non-negative");
    if (batch_clips < 1) throw ConfigError("batch_clips must be >= 1");
    if (max_sample_len < 1) throw ConfigError("max_sample_len must be >= 1");
    if (adam_eps <= 0.0) throw ConfigError("adam_eps must be positive");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
        throw ConfigError("adam betas must be in [0, 1)");
    if (stabilizer_weight < 0.0) throw ConfigError("stabilizer_weight must be >= 0");
}

std::string format_record(const LossRecord& r) {
    std::ostringstream os;
    os << "step=" << r.step << " phase=" << r.phase << " lr=" << fmt_double(r.lr)
       << " loss=" << fmt_double(r.loss);
    for (const auto& [k, v] : r.terms) os << " " << k << "=" << fmt_double(v);
    return os.str();
}

LossRecord parse_record(const std::string& line) {
    LossRecord r;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw FormatError("parse_record: bad token: " + tok);
        const std::string key = tok.substr(0, eq);
        const std::string val = tok.substr(eq + 1);
        if (key == "step")
            r.step = std::stol(val);
        else if (key == "phase")
            r.phase = val;
        else if (key == "lr")
            r.lr = std::stod(val);
        else if (key == "loss")
            r.loss = std::stod(val);
        else
            r.terms[key] = std::stod(val);
    }
    return r;
}

std::vector<int> usable_clips(const std::vector<Waveform>& corpus, const SpectralConfig& scfg,
                              const TrainingConfig& cfg) {
    const long eff_max = effective_max_len(scfg, cfg);
    const long need = min_crop_len(scfg);
    if (eff_max < need)
        throw DataError("max_sample_len " + std::to_string(cfg.max_sample_len) +
                        " too small for one loss frame (need >= " + std::to_string(need) + ")");
    std::vector<int> out;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const long aligned = (static_cast<long>(corpus[i].length()) / scfg.hop) * scfg.hop;
        if (aligned >= need) out.push_back(static_cast<int>(i));
    }
    if (out.empty()) throw DataError("no clip is long enough for one loss frame");
    return out;
}

TrainItem make_train_item(const Waveform& clip, int clip_index, const SpectralConfig& scfg,
                          const TrainingConfig& cfg, Rng* rng) {
    const long aligned = (static_cast<long>(clip.length()) / scfg.hop) * scfg.hop;
    const long crop = std::min(effective_max_len(scfg, cfg), aligned);
    if (crop < min_crop_len(scfg))
        throw DataError("clip too short for one loss frame");
    long start = 0;
    if (rng) {
        const long nstarts = (aligned - crop) / scfg.hop + 1;
        start = scfg.hop * static_cast<long>(rng->uniform_int(static_cast<int>(nstarts)));
    }

    Waveform window;
    window.sample_rate = clip.sample_rate;
    window.samples.assign(clip.samples.begin() + start, clip.samples.begin() + start + crop);

    TrainItem item;
    item.clip_index = clip_index;
    item.mel = mel_spectrogram(window, scfg);
    const long t = static_cast<long>(item.mel.frames()) * scfg.hop;
    item.target.assign(window.samples.begin(), window.samples.begin() + t);
    return item;
}

std::vector<TrainItem> draw_batch(const std::vector<Waveform>& corpus,
                                  const std::vector<int>& usable, const SpectralConfig& scfg,
                                  const TrainingConfig& cfg, Rng& rng) {
    std::vector<TrainItem> batch;
    batch.reserve(static_cast<std::size_t>(cfg.batch_clips));
    for (int i = 0; i < cfg.batch_clips; ++i) {
        const int idx = usable[static_cast<std::size_t>(rng.uniform_int(
            static_cast<int>(usable.size())))];
        batch.push_back(make_train_item(corpus[static_cast<std::size_t>(idx)], idx, scfg, cfg, &rng));
    }
    return batch;
}

LossRecord pretrain_step(IafGenerator& g, const std::vector<TrainItem>& batch, AdamState& opt_g,
                         const TrainingConfig& cfg, const SpectralConfig& scfg, Rng& rng,
                         long step) {
    if (batch.empty()) throw DataError("pretrain_step: empty batch");
    g.zero_grad();
    const double inv_b = 1.0 / static_cast<double>(batch.size());

    double loss = 0.0, spectral = 0.0, stabilizer = 0.0;
    for (const TrainItem& item : batch) {
        const int t = static_cast<int>(item.target.size());
        const NoiseSample noise = draw_logistic_noise(t, rng);
        IafGenerator::Trace tr;
        const std::vector<double> xp = g.forward_parallel(noise.z, item.mel, &tr);

        std::vector<double> gxp;
        const LossValue spec = log_mag_loss_grad(item.target, xp, scfg, &gxp);
        double l1 = 0.0;
        for (int i = 0; i < t; ++i) {
            const double d = xp[static_cast<std::size_t>(i)] - item.target[static_cast<std::size_t>(i)];
            l1 += std::abs(d);
            gxp[static_cast<std::size_t>(i)] +=
                cfg.stabilizer_weight * (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) / t;
        }
        l1 /= t;

        spectral += spec.value * inv_b;
        stabilizer += cfg.stabilizer_weight * l1 * inv_b;
        loss += (spec.value + cfg.stabilizer_weight * l1) * inv_b;
        g.backward(tr, scaled(gxp, inv_b));
    }

    std::vector<ParamRef> params;
    g.collect_params("generator", params);
    const double lr = noam_lr(opt_g.t + 1, cfg.lr_g, cfg.warmup_steps);
    adam_step(params, opt_g, lr, cfg.adam());

    LossRecord r;
    r.step = step;
    r.phase = "pretrain";
    r.lr = lr;
    r.loss = loss;
    r.terms["spectral"] = spectral;
    r.terms["stabilizer"] = stabilizer;
    return r;
}

LossRecord adapt_d_step(DiscriminatorNet& d, const IafGenerator& g,
                        const std::vector<TrainItem>& batch, AdamState& opt_d,
                        const TrainingConfig& cfg, const SpectralConfig& scfg, Rng& rng,
                        long step) {
    (void)scfg;
    if (batch.empty()) throw DataError("adapt_d_step: empty batch");
    d.zero_grad();
    const double inv_b = 1.0 / static_cast<double>(batch.size());

    double loss = 0.0, real_term = 0.0, fake_term = 0.0;
    double score_real = 0.0, score_fake = 0.0;
    for (const TrainItem& item : batch) {
        const int t = static_cast<int>(item.target.size());
        const NoiseSample noise = draw_logistic_noise(t, rng);
        const std::vector<double> fake = g.forward_parallel(noise.z, item.mel);

        DiscriminatorNet::Trace tr_real, tr_fake;
        const auto s_real = d.score(item.target, item.mel, &tr_real);
        const auto s_fake = d.score(fake, item.mel, &tr_fake);

        const LossValue lv = lsgan_d_loss(s_real.per_timestep, s_fake.per_timestep);
        loss += lv.value * inv_b;
        real_term += lv.breakdown.at("real") * inv_b;
        fake_term += lv.breakdown.at("fake") * inv_b;
        score_real += s_real.pooled * inv_b;
        score_fake += s_fake.pooled * inv_b;

        std::vector<double> g_real, g_fake;
        lsgan_d_loss_grad(s_real.per_timestep, s_fake.per_timestep, &g_real, &g_fake);
        d.backward(tr_real, scaled(g_real, inv_b));
        d.backward(tr_fake, scaled(g_fake, inv_b));
    }

    std::vector<ParamRef> params;
    d.collect_params("discriminator", params);
    const double lr = noam_lr(opt_d.t + 1, cfg.lr_d, cfg.warmup_steps);
    adam_step(params, opt_d, lr, cfg.adam());

    LossRecord r;
    r.step = step;
    r.phase = "freeze_d";  // caller overwrites with joint_d in phase 2
    r.lr = lr;
    r.loss = loss;
    r.terms["real"] = real_term;
    r.terms["fake"] = fake_term;
    r.terms["score_real"] = score_real;
    r.terms["score_fake"] = score_fake;
    return r;
}

LossRecord adapt_g_step(IafGenerator& g, DiscriminatorNet& d,
                        const std::vector<TrainItem>& batch, AdamState& opt_g,
                        const TrainingConfig& cfg, const SpectralConfig& scfg, Rng& rng,
                        long step) {
    if (batch.empty()) throw DataError("adapt_g_step: empty batch");
    g.zero_grad();
    const double inv_b = 1.0 / static_cast<double>(batch.size());

    double loss = 0.0, spectral = 0.0, adversarial = 0.0, score_fake = 0.0;
    for (const TrainItem& item : batch) {
        const int t = static_cast<int>(item.target.size());
        const NoiseSample noise = draw_logistic_noise(t, rng);
        IafGenerator::Trace tr_g;
        const std::vector<double> xp = g.forward_parallel(noise.z, item.mel, &tr_g);

        DiscriminatorNet::Trace tr_d;
        const auto s_fake = d.score(xp, item.mel, &tr_d);

        std::vector<double> gxp, g_scores;
        const LossValue lv = agan_g_loss_grad(xp, item.target, s_fake.per_timestep,
                                              cfg.lambda_adv, scfg, &gxp, &g_scores);
        loss += lv.value * inv_b;
        spectral += lv.breakdown.at("spectral") * inv_b;
        adversarial += lv.breakdown.at("adversarial") * inv_b;
        score_fake += s_fake.pooled * inv_b;

        // adversarial gradient reaches x' through the discriminator input
        std::vector<double> gx_adv;
        d.backward(tr_d, scaled(g_scores, inv_b), &gx_adv);
        for (std::size_t i = 0; i < gx_adv.size(); ++i) gx_adv[i] += gxp[i] * inv_b;
        g.backward(tr_g, gx_adv);
    }

    std::vector<ParamRef> params;
    g.collect_params("generator", params);
    const double lr = noam_lr(opt_g.t + 1, cfg.lr_g, cfg.warmup_steps);
    adam_step(params, opt_g, lr, cfg.adam());

    LossRecord r;
    r.step = step;
    r.phase = "joint_g";
    r.lr = lr;
    r.loss = loss;
    r.terms["spectral"] = spectral;
    r.terms["adversarial"] = adversarial;
    r.terms["score_fake"] = score_fake;
    return r;
}

Evaluation evaluate(const IafGenerator& g, const std::vector<Waveform>& heldout,
                    const SpectralConfig& scfg, const TrainingConfig& cfg) {
    if (heldout.empty()) throw ConfigError("evaluate: empty held-out set");
    const std::uint64_t eval_seed = derive_seed(cfg.seed, kEvalStream);

    std::vector<double> losses;
    double lsd_acc = 0.0;
    for (std::size_t i = 0; i < heldout.size(); ++i) {
        const TrainItem item =
            make_train_item(heldout[i], static_cast<int>(i), scfg, cfg, nullptr);
        const Waveform xp =
            g.sample(item.mel, derive_seed(eval_seed, i), heldout[i].sample_rate);
        losses.push_back(log_mag_loss(item.target, xp.samples, scfg).value);

        const ComplexSpectrogram sa = stft(item.target, scfg);
        const ComplexSpectrogram sb = stft(xp.samples, scfg);
        double lsd = 0.0;
        for (int f = 0; f < sa.frames(); ++f) {
            double frame_acc = 0.0;
            for (int b = 0; b < sa.bins(); ++b) {
                const double d =
                    20.0 * std::log10((std::abs(sa.values[static_cast<std::size_t>(f)][static_cast<std::size_t>(b)]) + scfg.eps) /
                                      (std::abs(sb.values[static_cast<std::size_t>(f)][static_cast<std::size_t>(b)]) + scfg.eps));
                frame_acc += d * d;
            }
            lsd += std::sqrt(frame_acc / sa.bins());
        }
        lsd_acc += lsd / sa.frames();
    }

    Evaluation ev;
    ev.clips = static_cast<int>(losses.size());
    ev.mean_log_mag = mean_of(losses);
    double var = 0.0;
    for (double l : losses) var += (l - ev.mean_log_mag) * (l - ev.mean_log_mag);
    ev.std_log_mag = losses.size() > 1 ? std::sqrt(var / (losses.size() - 1)) : 0.0;
    ev.mean_lsd = lsd_acc / static_cast<double>(losses.size());
    ev.per_clip_log_mag = std::move(losses);
    return ev;
}

PretrainRun::PretrainRun(IafGenerator& g, const std::vector<Waveform>& train,
                         const std::vector<Waveform>& heldout, const SpectralConfig& scfg,
                         const TrainingConfig& cfg)
    : g_(g), train_(train), heldout_(heldout), scfg_(scfg), cfg_(cfg),
      rng_(derive_seed(cfg.seed, kTrainStream)) {
    cfg_.validate();
    usable_ = usable_clips(train_, scfg_, cfg_);
}

void PretrainRun::restore(const Checkpoint& ck) {
    std::vector<ParamRef> params;
    g_.collect_params("", params);
    ck.load_params("generator", params);
    opt_g_ = ck.load_adam("adam_g");
    const auto it = ck.counters.find("pretrain.step");
    if (it == ck.counters.end()) throw CheckpointError("checkpoint: missing pretrain.step");
    step_ = static_cast<long>(it->second);
    if (!ck.has_rng_state) throw CheckpointError("checkpoint: missing rng state");
    rng_.set_state(ck.rng_state);
}

void PretrainRun::run(const RecordSink& sink, long stop_after) {
    while (step_ < cfg_.pretrain_steps && (stop_after <= 0 || step_ < stop_after)) {
        ++step_;
        const auto batch = draw_batch(train_, usable_, scfg_, cfg_, rng_);
        const LossRecord r = pretrain_step(g_, batch, opt_g_, cfg_, scfg_, rng_, step_);
        if (sink) sink(r);
        const bool at_end = step_ == cfg_.pretrain_steps;
        if (!heldout_.empty() && cfg_.eval_interval > 0 &&
            (step_ % cfg_.eval_interval == 0 || at_end)) {
            const Evaluation ev = evaluate(g_, heldout_, scfg_, cfg_);
            LossRecord er;
            er.step = step_;
            er.phase = "eval";
            er.loss = ev.mean_log_mag;
            er.terms["heldout_log_mag"] = ev.mean_log_mag;
            er.terms["heldout_log_mag_std"] = ev.std_log_mag;
            er.terms["heldout_lsd"] = ev.mean_lsd;
            if (sink) sink(er);
        }
    }
}

Checkpoint PretrainRun::make_checkpoint(const std::string& config_text) const {
    Checkpoint ck;
    ck.config_text = config_text;
    std::vector<ParamRef> params;
    g_.collect_params("", params);
    ck.store_params("generator", params);
    ck.store_adam("adam_g", opt_g_);
    ck.counters["pretrain.step"] = static_cast<std::uint64_t>(step_);
    ck.rng_state = rng_.state();
    ck.has_rng_state = true;
    return ck;
}

AdaptationRun::AdaptationRun(IafGenerator& g, DiscriminatorNet& d,
                             const std::vector<Waveform>& train,
                             const std::vector<Waveform>& heldout, const SpectralConfig& scfg,
                             const TrainingConfig& cfg)
    : g_(g), d_(d), train_(train), heldout_(heldout), scfg_(scfg), cfg_(cfg),
      rng_(derive_seed(cfg.seed, kTrainStream)) {
    cfg_.validate();
    usable_ = usable_clips(train_, scfg_, cfg_);
}

void AdaptationRun::restore(const Checkpoint& ck) {
    std::vector<ParamRef> gp, dp;
    g_.collect_params("", gp);
    d_.collect_params("", dp);
    ck.load_params("generator", gp);
    ck.load_params("discriminator", dp);
    opt_g_ = ck.load_adam("adam_g");
    opt_d_ = ck.load_adam("adam_d");
    const auto it = ck.counters.find("adapt.step");
    if (it == ck.counters.end()) throw CheckpointError("checkpoint: missing adapt.step");
    step_ = static_cast<long>(it->second);
    if (!ck.has_rng_state) throw CheckpointError("checkpoint: missing rng state");
    rng_.set_state(ck.rng_state);
}

void AdaptationRun::run(const RecordSink& sink, long stop_after) {
    const long total = total_steps();
    while (step_ < total && (stop_after <= 0 || step_ < stop_after)) {
        ++step_;
        const auto batch = draw_batch(train_, usable_, scfg_, cfg_, rng_);
        LossRecord r;
        if (step_ <= cfg_.freeze_g_steps) {
            r = adapt_d_step(d_, g_, batch, opt_d_, cfg_, scfg_, rng_, step_);
            r.phase = "freeze_d";
        } else if ((step_ - cfg_.freeze_g_steps) % 2 == 1) {
            r = adapt_d_step(d_, g_, batch, opt_d_, cfg_, scfg_, rng_, step_);
            r.phase = "joint_d";
        } else {
            r = adapt_g_step(g_, d_, batch, opt_g_, cfg_, scfg_, rng_, step_);
        }
        if (sink) sink(r);
        const bool at_end = step_ == total;
        if (!heldout_.empty() && cfg_.eval_interval > 0 &&
            (step_ % cfg_.eval_interval == 0 || at_end)) {
            const Evaluation ev = evaluate(g_, heldout_, scfg_, cfg_);
            LossRecord er;
            er.step = step_;
            er.phase = "eval";
            er.loss = ev.mean_log_mag;
            er.terms["heldout_log_mag"] = ev.mean_log_mag;
            er.terms["heldout_log_mag_std"] = ev.std_log_mag;
            er.terms["heldout_lsd"] = ev.mean_lsd;
            if (sink) sink(er);
        }
    }
}

Checkpoint AdaptationRun::make_checkpoint(const std::string& config_text) const {
    Checkpoint ck;
    ck.config_text = config_text;
    std::vector<ParamRef> gp, dp;
    g_.collect_params("", gp);
    d_.collect_params("", dp);
    ck.store_params("generator", gp);
    ck.store_params("discriminator", dp);
    ck.store_adam("adam_g", opt_g_);
    ck.store_adam("adam_d", opt_d_);
    ck.counters["adapt.step"] = static_cast<std::uint64_t>(step_);
    ck.rng_state = rng_.state();
    ck.has_rng_state = true;
    return ck;
}

}  // namespace agan
