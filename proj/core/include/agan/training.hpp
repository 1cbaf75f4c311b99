#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agan/checkpoint.hpp"
#include "agan/corpus.hpp"
#include "agan/discriminator.hpp"
#include "agan/generator.hpp"
#include "agan/losses.hpp"
#include "agan/optimizer.hpp"

namespace agan {

// Training hyperparameters. Defaults are the full-scale values; desk-scale
// runs shrink them through the experiment config.
struct TrainingConfig {
    double lambda_adv = 1.5;
    double lr_g = 0.005;
    double lr_d = 0.001;
    long warmup_steps = 4000;
    long pretrain_steps = 10000;
    long freeze_g_steps = 50000;
    long joint_steps = 100000;
    int batch_clips = 4;
    // cap on per-clip training length; crops round down to hop multiples
    long max_sample_len = 24000;
    std::uint64_t seed = 1234;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    long eval_interval = 1000;
    double stabilizer_weight = 0.1;  // pretraining-only time-domain L1 weight

    void validate() const;
    AdamConfig adam() const { return {beta1, beta2, adam_eps}; }
};

// One metrics-log record; serialized as a single "key=value ..." line.
struct LossRecord {
    long step = 0;
    std::string phase;  // pretrain | freeze_d | joint_d | joint_g | eval
    double lr = 0.0;
    double loss = 0.0;
    std::map<std::string, double> terms;
};

std::string format_record(const LossRecord& r);
LossRecord parse_record(const std::string& line);

// A hop-aligned crop with its mel condition; target holds the first
// frames*hop samples of the crop (the span the generator reproduces).
struct TrainItem {
    std::vector<double> target;
    MelSpectrogram mel;
    int clip_index = 0;
};

// Indices of clips long enough to yield at least one loss frame under the
// crop cap. DataError if none qualify.
std::vector<int> usable_clips(const std::vector<Waveform>& corpus, const SpectralConfig& scfg,
                              const TrainingConfig& cfg);

// Random hop-aligned crop of one clip (deterministic variant starts at 0).
TrainItem make_train_item(const Waveform& clip, int clip_index, const SpectralConfig& scfg,
                          const TrainingConfig& cfg, Rng* rng);

std::vector<TrainItem> draw_batch(const std::vector<Waveform>& corpus,
                                  const std::vector<int>& usable, const SpectralConfig& scfg,
                                  const TrainingConfig& cfg, Rng& rng);

// One generator-only step on log-mag loss plus the small time-domain L1
// stabilizer. Noise is drawn from rng, one clip at a time, before that
// clip's forward pass.
LossRecord pretrain_step(IafGenerator& g, const std::vector<TrainItem>& batch, AdamState& opt_g,
                         const TrainingConfig& cfg, const SpectralConfig& scfg, Rng& rng,
                         long step);

// One discriminator step on the least-squares objective against fakes from
// the (untouched) generator.
LossRecord adapt_d_step(DiscriminatorNet& d, const IafGenerator& g,
                        const std::vector<TrainItem>& batch, AdamState& opt_d,
                        const TrainingConfig& cfg, const SpectralConfig& scfg, Rng& rng,
                        long step);

// One generator step on the adversarial + spectral objective; discriminator
// parameter values are left bitwise intact.
LossRecord adapt_g_step(IafGenerator& g, DiscriminatorNet& d,
                        const std::vector<TrainItem>& batch, AdamState& opt_g,
                        const TrainingConfig& cfg, const SpectralConfig& scfg, Rng& rng,
                        long step);

struct Evaluation {
    double mean_log_mag = 0.0;
    double std_log_mag = 0.0;
    double mean_lsd = 0.0;  // dB log-spectral distance
    int clips = 0;
    std::vector<double> per_clip_log_mag;
};

// Deterministic held-out metrics: fixed per-clip sampling seeds derived from
// cfg.seed, deterministic leading crops. ConfigError on an empty set.
Evaluation evaluate(const IafGenerator& g, const std::vector<Waveform>& heldout,
                    const SpectralConfig& scfg, const TrainingConfig& cfg);

using RecordSink = std::function<void(const LossRecord&)>;

// Generator pretraining driver; checkpoints capture parameters, optimizer
// state, RNG state and the step counter so a resumed run replays the
// uninterrupted trajectory bit-exactly.
class PretrainRun {
  public:
    PretrainRun(IafGenerator& g, const std::vector<Waveform>& train,
                const std::vector<Waveform>& heldout, const SpectralConfig& scfg,
                const TrainingConfig& cfg);

    void restore(const Checkpoint& ck);
    // Runs until pretrain_steps (or stop_after, when positive).
    void run(const RecordSink& sink, long stop_after = 0);
    Checkpoint make_checkpoint(const std::string& config_text) const;
    long step() const { return step_; }

  private:
    IafGenerator& g_;
    const std::vector<Waveform>& train_;
    const std::vector<Waveform>& heldout_;
    SpectralConfig scfg_;
    TrainingConfig cfg_;
    std::vector<int> usable_;
    Rng rng_;
    AdamState opt_g_;
    long step_ = 0;
};

// Two-phase adaptation driver: freeze_g_steps of discriminator-only updates,
// then joint_steps alternating discriminator/generator updates 1:1.
class AdaptationRun {
  public:
    AdaptationRun(IafGenerator& g, DiscriminatorNet& d, const std::vector<Waveform>& train,
                  const std::vector<Waveform>& heldout, const SpectralConfig& scfg,
                  const TrainingConfig& cfg);

    void restore(const Checkpoint& ck);
    void run(const RecordSink& sink, long stop_after = 0);
    Checkpoint make_checkpoint(const std::string& config_text) const;
    long step() const { return step_; }
    long total_steps() const { return cfg_.freeze_g_steps + cfg_.joint_steps; }

  private:
    IafGenerator& g_;
    DiscriminatorNet& d_;
    const std::vector<Waveform>& train_;
    const std::vector<Waveform>& heldout_;
    SpectralConfig scfg_;
    TrainingConfig cfg_;
    std::vector<int> usable_;
    Rng rng_;
    AdamState opt_g_;
    AdamState opt_d_;
    long step_ = 0;
};

}  // namespace agan
