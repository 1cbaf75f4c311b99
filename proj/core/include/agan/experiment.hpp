#pragma once

#include <optional>
#include <string>

#include "agan/corpus.hpp"
#include "agan/discriminator.hpp"
#include "agan/generator.hpp"
#include "agan/training.hpp"

namespace agan {

// Full experiment description: audio analysis, corpora, both network
// architectures, training schedule. Parsed from a sectioned key=value file;
// unknown sections or keys are rejected, and the fully resolved config is
// echoed into every run directory.
struct ExperimentConfig {
    std::uint64_t seed = 1234;

    int sample_rate = 22050;
    SpectralConfig spectral;

    int train_clips = 2000;
    int heldout_clips = 30;
    int clip_len = 44100;
    SpeakerSpec speaker_pretrain;
    SpeakerSpec speaker_adapt;

    int g_stages = 2;
    int g_kernel = 2;
    int g_dilation_layers = 8;  // dilations 1,2,4,...,2^(n-1)
    int g_residual_channels = 32;
    int g_skip_channels = 32;
    int g_cond_channels = 16;
    int g_upsampler_channels = 32;
    double g_logscale_clamp = 7.0;

    int d_channels = 64;
    DilationSchedule d_schedule = DilationSchedule::literal;
    int d_cond_channels = 16;
    int d_upsampler_channels = 32;

    TrainingConfig training;

    static ExperimentConfig defaults();
    static ExperimentConfig parse_text(const std::string& text);
    static ExperimentConfig parse_file(const std::string& path);

    // Canonical text with every key explicit; parse_text(echo()) round-trips.
    std::string echo() const;

    void validate() const;
    IafGeneratorConfig generator_config() const;
    DiscriminatorConfig discriminator_config() const;

    IafGenerator build_generator() const;
    DiscriminatorNet build_discriminator() const;

    // Train/held-out corpora; disjoint by construction (one seeded synthesis,
    // leading clips train, trailing clips held out).
    void build_corpora(bool adapt_speaker, std::vector<Waveform>* train,
                       std::vector<Waveform>* heldout) const;
};

struct ZoomSpec {
    bool enabled = false;
    double t0 = 0.0, t1 = 0.0;      // seconds
    double f0_hz = 0.0, f1_hz = 0.0;
};

struct CmdOptions {
    std::optional<std::uint64_t> seed;
    std::optional<double> lambda;
    std::string speaker = "adapt";  // eval corpus selector
    int plot_clips = 2;
    ZoomSpec zoom;
};

// Command implementations behind the CLI verbs. Each writes metrics.log,
// config_resolved.cfg and run_summary.txt into out_dir and throws typed
// errors on failure.
void cmd_pretrain(const std::string& config_path, const std::string& out_dir,
                  const CmdOptions& opt = {});
void cmd_adapt(const std::string& config_path, const std::string& checkpoint_path,
               const std::string& out_dir, const CmdOptions& opt = {});
void cmd_synth(const std::string& checkpoint_path, const std::string& input_path,
               const std::string& out_wav, std::uint64_t seed);
void cmd_eval(const std::string& config_path, const std::string& checkpoint_path,
              const std::string& out_dir, const CmdOptions& opt = {});

}  // namespace agan
