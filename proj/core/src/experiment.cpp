#include "agan/experiment.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "agan/errors.hpp"
#include "agan/plot.hpp"

namespace agan {

namespace {

constexpr std::uint64_t kCorpusPretrainStream = 0xC0A1;
constexpr std::uint64_t kCorpusAdaptStream = 0xC0A2;
constexpr std::uint64_t kGenInitStream = 0x61C1;
constexpr std::uint64_t kDiscInitStream = 0x61C2;

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

long parse_long(const std::string& where, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long r = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        throw ConfigError("invalid integer for " + where + ": '" + v + "'");
    }
}

std::uint64_t parse_u64(const std::string& where, const std::string& v) {
    try {
        std::size_t pos = 0;
        const std::uint64_t r = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        throw ConfigError("invalid unsigned integer for " + where + ": '" + v + "'");
    }
}

double parse_double(const std::string& where, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double r = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        throw ConfigError("invalid number for " + where + ": '" + v + "'");
    }
}

bool parse_bool(const std::string& where, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("invalid boolean for " + where + ": '" + v + "'");
}

struct KeyDef {
    std::string section;
    std::string key;
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
};

std::vector<KeyDef> speaker_keys(const std::string& section,
                                 SpeakerSpec ExperimentConfig::* member) {
    auto num = [member](double SpeakerSpec::* f) {
        return std::pair(
            std::function<std::string(const ExperimentConfig&)>(
                [member, f](const ExperimentConfig& c) { return fmt_double(c.*member.*f); }),
            std::function<void(ExperimentConfig&, const std::string&, const std::string&)>(
                [member, f](ExperimentConfig& c, const std::string& w, const std::string& v) {
                    c.*member.*f = parse_double(w, v);
                }));
    };
    std::vector<KeyDef> defs;
    auto add = [&](const std::string& key, double SpeakerSpec::* f) {
        auto [g, s] = num(f);
        defs.push_back({section, key, g, s});
    };
    add("f0_min", &SpeakerSpec::f0_min);
    add("f0_max", &SpeakerSpec::f0_max);
    add("harmonic_decay", &SpeakerSpec::harmonic_decay);
    add("even_harmonic_gain", &SpeakerSpec::even_harmonic_gain);
    add("vibrato_rate_hz", &SpeakerSpec::vibrato_rate_hz);
    add("vibrato_cents", &SpeakerSpec::vibrato_cents);
    add("attack_frac", &SpeakerSpec::attack_frac);
    add("release_frac", &SpeakerSpec::release_frac);
    add("noise_level", &SpeakerSpec::noise_level);
    defs.push_back({section, "n_harmonics",
                    [member](const ExperimentConfig& c) {
                        return std::to_string((c.*member).n_harmonics);
                    },
                    [member](ExperimentConfig& c, const std::string& w, const std::string& v) {
                        (c.*member).n_harmonics = static_cast<int>(parse_long(w, v));
                    }});
    return defs;
}

const std::vector<KeyDef>& key_table() {
    static const std::vector<KeyDef> table = [] {
        std::vector<KeyDef> t;
        auto add_int = [&t](const char* sec, const char* key, int ExperimentConfig::* f) {
            t.push_back({sec, key,
                         [f](const ExperimentConfig& c) { return std::to_string(c.*f); },
                         [f](ExperimentConfig& c, const std::string& w, const std::string& v) {
                             c.*f = static_cast<int>(parse_long(w, v));
                         }});
        };
        auto add_dbl = [&t](const char* sec, const char* key, double ExperimentConfig::* f) {
            t.push_back({sec, key,
                         [f](const ExperimentConfig& c) { return fmt_double(c.*f); },
                         [f](ExperimentConfig& c, const std::string& w, const std::string& v) {
                             c.*f = parse_double(w, v);
                         }});
        };
        auto add_tlong = [&t](const char* sec, const char* key, long TrainingConfig::* f) {
            t.push_back({sec, key,
                         [f](const ExperimentConfig& c) { return std::to_string(c.training.*f); },
                         [f](ExperimentConfig& c, const std::string& w, const std::string& v) {
                             c.training.*f = parse_long(w, v);
                         }});
        };
        auto add_tdbl = [&t](const char* sec, const char* key, double TrainingConfig::* f) {
            t.push_back({sec, key,
                         [f](const ExperimentConfig& c) { return fmt_double(c.training.*f); },
                         [f](ExperimentConfig& c, const std::string& w, const std::string& v) {
                             c.training.*f = parse_double(w, v);
                         }});
        };

        t.push_back({"experiment", "seed",
                     [](const ExperimentConfig& c) { return std::to_string(c.seed); },
                     [](ExperimentConfig& c, const std::string& w, const std::string& v) {
                         c.seed = parse_u64(w, v);
                     }});

        add_int("audio", "sample_rate", &ExperimentConfig::sample_rate);
        t.push_back({"audio", "frame_length",
                     [](const ExperimentConfig& c) { return std::to_string(c.spectral.frame_length); },
                     [](ExperimentConfig& c, const std::string& w, const std::string& v) {
                         c.spectral.frame_length = static_cast<int>(parse_long(w, v));
                     }});
        t.push_back({"audio", "hop",
                     [](const ExperimentConfig& c) { return std::to_string(c.spectral.hop); },
                     [](ExperimentConfig& c, const std::string& w, const std::string& v) {
                         c.spectral.hop = static_cast<int>(parse_long(w, v));
                     }});
        t.push_back({"audio", "window",
                     [](const ExperimentConfig& c) { return window_to_string(c.spectral.window); },
                     [](ExperimentConfig& c, const std::string&, const std::string& v) {
                         c.spectral.window = window_from_string(v);
                     }});
        t.push_back({"audio", "n_mels",
                     [](const ExperimentConfig& c) { return std::to_string(c.spectral.n_mels); },
                     [](ExperimentConfig& c, const std::string& w, const std::string& v) {
                         c.spectral.n_mels = static_cast<int>(parse_long(w, v));
                     }});
        t.push_back({"audio", "eps",
                     [](const ExperimentConfig& c) { return fmt_double(c.spectral.eps); },
                     [](ExperimentConfig& c, const std::string& w, const std::string& v) {
                         c.spectral.eps = parse_double(w, v);
                     }});
        t.push_back({"audio", "fmin",
                     [](const ExperimentConfig& c) { return fmt_double(c.spectral.fmin); },
                     [](ExperimentConfig& c, const std::string& w, const std::string& v) {
                         c.spectral.fmin = parse_double(w, v);
                     }});
        t.push_back({"audio", "fmax",
                     [](const ExperimentConfig& c) { return fmt_double(c.spectral.fmax); },
                     [](ExperimentConfig& c, const std::string& w, const std::string& v) {
                         c.spectral.fmax = parse_double(w, v);
                     }});
        t.push_back({"audio", "log_mel",
                     [](const ExperimentConfig& c) { return c.spectral.log_mel ? "true" : "false"; },
                     [](ExperimentConfig& c, const std::string& w, const std::string& v) {
                         c.spectral.log_mel = parse_bool(w, v);
                     }});

        add_int("corpus", "train_clips", &ExperimentConfig::train_clips);
        add_int("corpus", "heldout_clips", &ExperimentConfig::heldout_clips);
        add_int("corpus", "clip_len", &ExperimentConfig::clip_len);

        for (auto& d : speaker_keys("speaker_pretrain", &ExperimentConfig::speaker_pretrain))
            t.push_back(d);
        for (auto& d : speaker_keys("speaker_adapt", &ExperimentConfig::speaker_adapt))
            t.push_back(d);

        add_int("generator", "stages", &ExperimentConfig::g_stages);
        add_int("generator", "kernel", &ExperimentConfig::g_kernel);
        add_int("generator", "dilation_layers", &ExperimentConfig::g_dilation_layers);
        add_int("generator", "residual_channels", &ExperimentConfig::g_residual_channels);
        add_int("generator", "skip_channels", &ExperimentConfig::g_skip_channels);
        add_int("generator", "cond_channels", &ExperimentConfig::g_cond_channels);
        add_int("generator", "upsampler_channels", &ExperimentConfig::g_upsampler_channels);
        add_dbl("generator", "logscale_clamp", &ExperimentConfig::g_logscale_clamp);

        add_int("discriminator", "channels", &ExperimentConfig::d_channels);
        t.push_back({"discriminator", "dilation_schedule",
                     [](const ExperimentConfig& c) {
                         return dilation_schedule_to_string(c.d_schedule);
                     },
                     [](ExperimentConfig& c, const std::string&, const std::string& v) {
                         c.d_schedule = dilation_schedule_from_string(v);
                     }});
        add_int("discriminator", "cond_channels", &ExperimentConfig::d_cond_channels);
        add_int("discriminator", "upsampler_channels", &ExperimentConfig::d_upsampler_channels);

        add_tdbl("training", "lambda_adv", &TrainingConfig::lambda_adv);
        add_tdbl("training", "lr_g", &TrainingConfig::lr_g);
        add_tdbl("training", "lr_d", &TrainingConfig::lr_d);
        add_tlong("training", "warmup_steps", &TrainingConfig::warmup_steps);
        add_tlong("training", "pretrain_steps", &TrainingConfig::pretrain_steps);
        add_tlong("training", "freeze_g_steps", &TrainingConfig::freeze_g_steps);
        add_tlong("training", "joint_steps", &TrainingConfig::joint_steps);
        t.push_back({"training", "batch_clips",
                     [](const ExperimentConfig& c) { return std::to_string(c.training.batch_clips); },
                     [](ExperimentConfig& c, const std::string& w, const std::string& v) {
                         c.training.batch_clips = static_cast<int>(parse_long(w, v));
                     }});
        add_tlong("training", "max_sample_len", &TrainingConfig::max_sample_len);
        add_tdbl("training", "beta1", &TrainingConfig::beta1);
        add_tdbl("training", "beta2", &TrainingConfig::beta2);
        add_tdbl("training", "adam_eps", &TrainingConfig::adam_eps);
        add_tlong("training", "eval_interval", &TrainingConfig::eval_interval);
        add_tdbl("training", "stabilizer_weight", &TrainingConfig::stabilizer_weight);
        return t;
    }();
    return table;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot open " + path + " for writing");
    f << content;
    if (!f) throw DataError("write failed: " + path);
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults() {
    ExperimentConfig c;
    // pretrain speaker keeps SpeakerSpec defaults; the adaptation speaker is
    // a deliberately different timbre family
    c.speaker_adapt.f0_min = 200.0;
    c.speaker_adapt.f0_max = 300.0;
    c.speaker_adapt.harmonic_decay = 0.45;
    c.speaker_adapt.even_harmonic_gain = 0.35;
    c.speaker_adapt.vibrato_rate_hz = 6.5;
    c.speaker_adapt.vibrato_cents = 50.0;
    c.speaker_adapt.attack_frac = 0.05;
    c.speaker_adapt.release_frac = 0.15;
    c.speaker_adapt.noise_level = 0.01;
    c.training.seed = c.seed;
    return c;
}

ExperimentConfig ExperimentConfig::parse_text(const std::string& text) {
    ExperimentConfig cfg = defaults();
    std::istringstream is(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            section = s.substr(1, s.size() - 2);
            bool known = false;
            for (const auto& d : key_table())
                if (d.section == section) known = true;
            if (!known) throw ConfigError("unknown config section: [" + section + "]");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (section.empty()) throw ConfigError("key '" + key + "' outside any section");
        const KeyDef* def = nullptr;
        for (const auto& d : key_table())
            if (d.section == section && d.key == key) def = &d;
        if (!def) throw ConfigError("unknown config key: " + section + "." + key);
        def->set(cfg, section + "." + key, value);
    }
    cfg.training.seed = cfg.seed;
    return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_text(ss.str());
}

std::string ExperimentConfig::echo() const {
    std::ostringstream os;
    std::string current;
    for (const auto& d : key_table()) {
        if (d.section != current) {
            if (!current.empty()) os << "\n";
            os << "[" << d.section << "]\n";
            current = d.section;
        }
        os << d.key << " = " << d.get(*this) << "\n";
    }
    return os.str();
}

void ExperimentConfig::validate() const {
    if (sample_rate <= 0) throw ConfigError("sample_rate must be positive");
    spectral.validate();
    if (train_clips < 1) throw ConfigError("train_clips must be >= 1");
    if (heldout_clips < 1) throw ConfigError("heldout_clips must be >= 1");
    if (clip_len < spectral.frame_length)
        throw ConfigError("clip_len must be at least frame_length");
    speaker_pretrain.validate();
    speaker_adapt.validate();
    if (g_stages < 1 || g_kernel < 1 || g_dilation_layers < 1)
        throw ConfigError("invalid generator architecture");
    if (g_residual_channels < 1 || g_skip_channels < 1 || g_cond_channels < 1 ||
        g_upsampler_channels < 1)
        throw ConfigError("generator channel widths must be >= 1");
    if (d_channels < 1 || d_cond_channels < 1 || d_upsampler_channels < 1)
        throw ConfigError("discriminator channel widths must be >= 1");
    training.validate();
}

IafGeneratorConfig ExperimentConfig::generator_config() const {
    IafGeneratorConfig g;
    g.stages = g_stages;
    g.stage.kernel = g_kernel;
    g.stage.dilations = IafGeneratorConfig::doubling_dilations(g_dilation_layers);
    g.stage.residual_channels = g_residual_channels;
    g.stage.skip_channels = g_skip_channels;
    g.stage.cond_channels = g_cond_channels;
    g.stage.logscale_clamp = g_logscale_clamp;
    g.upsampler_hidden = g_upsampler_channels;
    return g;
}

DiscriminatorConfig ExperimentConfig::discriminator_config() const {
    DiscriminatorConfig d;
    d.channels = d_channels;
    d.schedule = d_schedule;
    d.cond_channels = d_cond_channels;
    d.upsampler_hidden = d_upsampler_channels;
    return d;
}

IafGenerator ExperimentConfig::build_generator() const {
    Rng rng(derive_seed(seed, kGenInitStream));
    return IafGenerator(generator_config(), spectral.n_mels, spectral.hop, rng);
}

DiscriminatorNet ExperimentConfig::build_discriminator() const {
    Rng rng(derive_seed(seed, kDiscInitStream));
    return DiscriminatorNet(discriminator_config(), spectral.n_mels, spectral.hop, rng);
}

void ExperimentConfig::build_corpora(bool adapt_speaker, std::vector<Waveform>* train,
                                     std::vector<Waveform>* heldout) const {
    const SpeakerSpec& spec = adapt_speaker ? speaker_adapt : speaker_pretrain;
    const std::uint64_t stream = adapt_speaker ? kCorpusAdaptStream : kCorpusPretrainStream;
    std::vector<Waveform> all = synth_corpus(spec, train_clips + heldout_clips, clip_len,
                                             sample_rate, derive_seed(seed, stream));
    if (train)
        train->assign(all.begin(), all.begin() + train_clips);
    if (heldout)
        heldout->assign(all.begin() + train_clips, all.end());
}

namespace {

void write_summary(const std::string& path, const std::vector<std::pair<std::string, std::string>>& kv) {
    std::ostringstream os;
    for (const auto& [k, v] : kv) os << k << "=" << v << "\n";
    write_text_file(path, os.str());
}

ExperimentConfig load_config_with_overrides(const std::string& config_path,
                                            const CmdOptions& opt) {
    ExperimentConfig cfg = ExperimentConfig::parse_file(config_path);
    if (opt.seed) {
        cfg.seed = *opt.seed;
        cfg.training.seed = *opt.seed;
    }
    if (opt.lambda) cfg.training.lambda_adv = *opt.lambda;
    cfg.validate();
    return cfg;
}

}  // namespace

void cmd_pretrain(const std::string& config_path, const std::string& out_dir,
                  const CmdOptions& opt) {
    const ExperimentConfig cfg = load_config_with_overrides(config_path, opt);
    std::filesystem::create_directories(out_dir);
    write_text_file(out_dir + "/config_resolved.cfg", cfg.echo());

    std::vector<Waveform> train, heldout;
    cfg.build_corpora(/*adapt_speaker=*/false, &train, &heldout);

    IafGenerator g = cfg.build_generator();
    PretrainRun run(g, train, heldout, cfg.spectral, cfg.training);

    std::ofstream log(out_dir + "/metrics.log", std::ios::trunc);
    if (!log) throw DataError("cannot open metrics log in " + out_dir);
    run.run([&log](const LossRecord& r) { log << format_record(r) << "\n"; });
    log.flush();

    run.make_checkpoint(cfg.echo()).save(out_dir + "/pretrained.ckpt");

    const Evaluation ev = evaluate(g, heldout, cfg.spectral, cfg.training);
    write_summary(out_dir + "/run_summary.txt",
                  {{"command", "pretrain"},
                   {"steps", std::to_string(run.step())},
                   {"heldout_log_mag", fmt_double(ev.mean_log_mag)},
                   {"heldout_log_mag_std", fmt_double(ev.std_log_mag)},
                   {"heldout_lsd", fmt_double(ev.mean_lsd)}});
}

void cmd_adapt(const std::string& config_path, const std::string& checkpoint_path,
               const std::string& out_dir, const CmdOptions& opt) {
    const ExperimentConfig cfg = load_config_with_overrides(config_path, opt);
    std::filesystem::create_directories(out_dir);
    write_text_file(out_dir + "/config_resolved.cfg", cfg.echo());

    const Checkpoint pretrained = Checkpoint::load(checkpoint_path);
    if (!pretrained.has_prefix("generator"))
        throw CheckpointError("adapt: checkpoint has no generator parameters");
    // structural teacher-free assertion: the only adaptation inputs are the
    // generator checkpoint, the corpus and this config
    if (!pretrained.teacher_free())
        throw CheckpointError("adapt: checkpoint contains non-generator/discriminator blocks");

    std::vector<Waveform> train, heldout;
    cfg.build_corpora(/*adapt_speaker=*/true, &train, &heldout);

    IafGenerator g = cfg.build_generator();
    std::vector<ParamRef> gp;
    g.collect_params("", gp);
    pretrained.load_params("generator", gp);

    const Evaluation before = evaluate(g, heldout, cfg.spectral, cfg.training);

    DiscriminatorNet d = cfg.build_discriminator();
    AdaptationRun run(g, d, train, heldout, cfg.spectral, cfg.training);

    std::ofstream log(out_dir + "/metrics.log", std::ios::trunc);
    if (!log) throw DataError("cannot open metrics log in " + out_dir);
    std::vector<double> joint_gaps;
    run.run([&](const LossRecord& r) {
        log << format_record(r) << "\n";
        if (r.phase == "joint_d")
            joint_gaps.push_back(
                std::abs(r.terms.at("score_real") - r.terms.at("score_fake")));
    });
    log.flush();

    const Checkpoint final_ck = run.make_checkpoint(cfg.echo());
    final_ck.save(out_dir + "/adapted.ckpt");

    const Evaluation after = evaluate(g, heldout, cfg.spectral, cfg.training);

    double gap_start = 0.0, gap_end = 0.0;
    if (!joint_gaps.empty()) {
        const std::size_t w = std::min<std::size_t>(50, joint_gaps.size());
        for (std::size_t i = 0; i < w; ++i) gap_start += joint_gaps[i];
        for (std::size_t i = joint_gaps.size() - w; i < joint_gaps.size(); ++i)
            gap_end += joint_gaps[i];
        gap_start /= static_cast<double>(w);
        gap_end /= static_cast<double>(w);
    }

    write_summary(out_dir + "/run_summary.txt",
                  {{"command", "adapt"},
                   {"teacher_free", (pretrained.teacher_free() && final_ck.teacher_free()) ? "1" : "0"},
                   {"steps", std::to_string(run.step())},
                   {"lambda_adv", fmt_double(cfg.training.lambda_adv)},
                   {"heldout_log_mag_pretrained", fmt_double(before.mean_log_mag)},
                   {"heldout_log_mag_adapted", fmt_double(after.mean_log_mag)},
                   {"heldout_lsd_adapted", fmt_double(after.mean_lsd)},
                   {"score_gap_phase2_start", fmt_double(gap_start)},
                   {"score_gap_phase2_end", fmt_double(gap_end)}});
}

void cmd_synth(const std::string& checkpoint_path, const std::string& input_path,
               const std::string& out_wav, std::uint64_t seed) {
    const Checkpoint ck = Checkpoint::load(checkpoint_path);
    const ExperimentConfig cfg = ExperimentConfig::parse_text(ck.config_text);

    IafGenerator g = cfg.build_generator();
    std::vector<ParamRef> gp;
    g.collect_params("", gp);
    ck.load_params("generator", gp);

    MelSpectrogram mel;
    int sr = cfg.sample_rate;
    if (input_path.size() >= 4 && input_path.substr(input_path.size() - 4) == ".wav") {
        const Waveform ref = load_wav(input_path);
        sr = ref.sample_rate;
        SpectralConfig scfg = cfg.spectral;
        mel = mel_spectrogram(ref, scfg);
    } else {
        mel = load_mel(input_path, &sr);
        if (mel.config.hop != cfg.spectral.hop)
            throw DataError("synth: mel hop " + std::to_string(mel.config.hop) +
                            " does not match checkpoint hop " +
                            std::to_string(cfg.spectral.hop));
    }
    if (mel.frames() < 1) throw DataError("synth: empty mel input");
    if (mel.values.cols != cfg.spectral.n_mels)
        throw DataError("synth: mel width " + std::to_string(mel.values.cols) +
                        " does not match checkpoint n_mels " +
                        std::to_string(cfg.spectral.n_mels));

    const Waveform out = g.sample(mel, seed, sr);
    save_wav(out, out_wav);
}

void cmd_eval(const std::string& config_path, const std::string& checkpoint_path,
              const std::string& out_dir, const CmdOptions& opt) {
    const ExperimentConfig cfg = load_config_with_overrides(config_path, opt);
    std::filesystem::create_directories(out_dir);
    write_text_file(out_dir + "/config_resolved.cfg", cfg.echo());

    bool adapt_speaker;
    if (opt.speaker == "adapt")
        adapt_speaker = true;
    else if (opt.speaker == "pretrain")
        adapt_speaker = false;
    else
        throw ConfigError("eval: speaker must be 'pretrain' or 'adapt', got '" + opt.speaker + "'");

    const Checkpoint ck = Checkpoint::load(checkpoint_path);
    IafGenerator g = cfg.build_generator();
    std::vector<ParamRef> gp;
    g.collect_params("", gp);
    ck.load_params("generator", gp);

    std::vector<Waveform> heldout;
    cfg.build_corpora(adapt_speaker, nullptr, &heldout);

    const Evaluation ev = evaluate(g, heldout, cfg.spectral, cfg.training);

    std::ostringstream report;
    report << "held-out clips: " << ev.clips << "\n";
    report << "log_mag_loss mean: " << fmt_double(ev.mean_log_mag) << "\n";
    report << "log_mag_loss std: " << fmt_double(ev.std_log_mag) << "\n";
    report << "log_spectral_distance_db mean: " << fmt_double(ev.mean_lsd) << "\n";
    for (std::size_t i = 0; i < ev.per_clip_log_mag.size(); ++i)
        report << "clip " << i << " log_mag=" << fmt_double(ev.per_clip_log_mag[i]) << "\n";
    write_text_file(out_dir + "/metrics.txt", report.str());

    // spectrogram case-study plots
    const std::uint64_t eval_seed = derive_seed(cfg.training.seed, 0x6576616C);
    const int nplots = std::min<int>(opt.plot_clips, static_cast<int>(heldout.size()));
    for (int i = 0; i < nplots; ++i) {
        const TrainItem item = make_train_item(heldout[static_cast<std::size_t>(i)], i,
                                               cfg.spectral, cfg.training, nullptr);
        const Waveform xp = g.sample(item.mel, derive_seed(eval_seed, static_cast<std::uint64_t>(i)),
                                     cfg.sample_rate);
        const ComplexSpectrogram spec_gen = stft(xp.samples, cfg.spectral);
        const ComplexSpectrogram spec_ref = stft(item.target, cfg.spectral);
        write_spectrogram_pair_bmp(spec_gen, spec_ref, cfg.sample_rate,
                                   out_dir + "/clip_" + std::to_string(i) + ".bmp", opt.zoom);
    }

    write_summary(out_dir + "/run_summary.txt",
                  {{"command", "eval"},
                   {"speaker", opt.speaker},
                   {"clips", std::to_string(ev.clips)},
                   {"heldout_log_mag", fmt_double(ev.mean_log_mag)},
                   {"heldout_log_mag_std", fmt_double(ev.std_log_mag)},
                   {"heldout_lsd", fmt_double(ev.mean_lsd)},
                   {"plots", std::to_string(nplots)}});
}

}  // namespace agan
