// Command-line front end: pretrain / adapt / synth / eval.
//
// Exit codes: 0 success, 1 usage or config error, 2 data/checkpoint error.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "agan/errors.hpp"
#include "agan/experiment.hpp"

namespace {

agan::ZoomSpec parse_zoom(const std::string& s) {
    agan::ZoomSpec z;
    if (s.empty()) return z;
    double vals[4];
    std::size_t pos = 0;
    for (int i = 0; i < 4; ++i) {
        const std::size_t next = i < 3 ? s.find(':', pos) : s.size();
        if (next == std::string::npos) throw agan::ConfigError("--zoom expects t0:t1:f0:f1");
        try {
            vals[i] = std::stod(s.substr(pos, next - pos));
        } catch (const std::exception&) {
            throw agan::ConfigError("--zoom expects numeric t0:t1:f0:f1");
        }
        pos = next + 1;
    }
    z.enabled = true;
    z.t0 = vals[0];
    z.t1 = vals[1];
    z.f0_hz = vals[2];
    z.f1_hz = vals[3];
    if (z.t1 <= z.t0 || z.f1_hz <= z.f0_hz)
        throw agan::ConfigError("--zoom window must have t1 > t0 and f1 > f0");
    return z;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GAN-based speaker adaptation for a parallel neural vocoder"};
    app.require_subcommand(1);

    std::string config_path, out_path, ckpt_path, input_path, zoom_str, speaker = "adapt";
    std::uint64_t seed = 0;
    bool seed_given = false;
    double lambda = 0.0;
    bool lambda_given = false;
    int plot_clips = 2;

    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option_function<std::uint64_t>(
               "--seed",
               [&](const std::uint64_t& v) {
                   seed = v;
                   seed_given = true;
               },
               "Override the master seed from the config");
    };

    CLI::App* pre = app.add_subcommand("pretrain", "Pretrain the flow generator on speaker A");
    pre->add_option("--config", config_path, "Experiment config file")->required();
    pre->add_option("--out", out_path, "Output directory")->required();
    add_seed(pre);

    CLI::App* ada = app.add_subcommand("adapt", "Adversarially adapt a pretrained generator to speaker B");
    ada->add_option("--config", config_path, "Experiment config file")->required();
    ada->add_option("--ckpt", ckpt_path, "Pretrained generator checkpoint")->required();
    ada->add_option("--out", out_path, "Output directory")->required();
    ada->add_option_function<double>(
           "--lambda",
           [&](const double& v) {
               lambda = v;
               lambda_given = true;
           },
           "Override the adversarial loss weight");
    add_seed(ada);

    CLI::App* syn = app.add_subcommand("synth", "Synthesize a waveform from mel conditioning");
    syn->add_option("--ckpt", ckpt_path, "Generator checkpoint")->required();
    syn->add_option("--input", input_path, "Reference .wav or .melb conditioning file")->required();
    syn->add_option("--out", out_path, "Output WAV path")->required();
    syn->add_option("--seed", seed, "Noise seed");

    CLI::App* ev = app.add_subcommand("eval", "Evaluate a checkpoint on held-out clips and render spectrograms");
    ev->add_option("--config", config_path, "Experiment config file")->required();
    ev->add_option("--ckpt", ckpt_path, "Generator checkpoint")->required();
    ev->add_option("--out", out_path, "Output directory")->required();
    ev->add_option("--speaker", speaker, "Held-out corpus: pretrain or adapt")
        ->default_val("adapt");
    ev->add_option("--plot-clips", plot_clips, "Number of clips to plot")->default_val(2);
    ev->add_option("--zoom", zoom_str, "Zoom window t0:t1:f0:f1 (seconds, Hz)");
    add_seed(ev);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        agan::CmdOptions opt;
        if (seed_given) opt.seed = seed;
        if (lambda_given) opt.lambda = lambda;
        opt.speaker = speaker;
        opt.plot_clips = plot_clips;
        opt.zoom = parse_zoom(zoom_str);

        if (pre->parsed()) {
            agan::cmd_pretrain(config_path, out_path, opt);
        } else if (ada->parsed()) {
            agan::cmd_adapt(config_path, ckpt_path, out_path, opt);
        } else if (syn->parsed()) {
            agan::cmd_synth(ckpt_path, input_path, out_path, seed);
        } else if (ev->parsed()) {
            agan::cmd_eval(config_path, ckpt_path, out_path, opt);
        }
    } catch (const agan::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const agan::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
