// pacodi: frequency-domain diffusion engine for time-series generation.
// Subcommands: gen-data, train, sample, metrics, verify, flops.
// Exit codes: 0 success, 1 verification/validation failure, 2 usage error.

#include <CLI11.hpp>

#include "pacodi/complexity.hpp"
#include "pacodi/metrics.hpp"
#include "pacodi/theorem_lab.hpp"
#include "pacodi/trainer.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace pacodi;

std::string command_line(int argc, char** argv) {
    std::ostringstream oss;
    for (int i = 0; i < argc; ++i) oss << (i ? " " : "") << argv[i];
    return oss.str();
}

std::vector<TemporalSeries> load_series(const std::string& path, int length, int stride,
                                        bool header) {
    std::ifstream probe(path);
    if (!probe) throw InvalidInputError("cannot open '" + path + "'");
    std::string first;
    std::getline(probe, first);
    probe.close();
    if (first.rfind("# pacodi-samples", 0) == 0) return read_samples_csv(path);
    if (length <= 0)
        throw InvalidInputError("'" + path +
                                "' is a raw CSV; pass --length to window it");
    return ingest_csv(path, length, stride, header).samples;
}

int run_gen_data(const std::string& kind, int n, int length, int channels, int tone_bin,
                 const std::string& out, std::uint64_t seed, const std::string& cmd) {
    Rng rng(seed);
    Dataset ds;
    if (kind == "sines")
        ds = gen_sines(n, length, channels, rng);
    else if (kind == "single-tone")
        ds = gen_single_tone(n, length, channels, tone_bin, rng);
    else
        throw InvalidInputError("gen-data: kind must be sines|single-tone");
    write_samples_csv(out, ds.samples, cmd);
    std::cout << "wrote " << ds.samples.size() << " samples (" << length << "x" << channels
              << ") to " << out << "\n";
    return 0;
}

int run_train(const std::string& config_path, std::uint64_t seed, bool seed_set,
              const std::string& out, const std::string& resume) {
    if (!resume.empty()) {
        Checkpoint ckpt = load_checkpoint(resume);
        if (!config_path.empty()) {
            const PipelineConfig fresh = PipelineConfig::from_file(config_path);
            if (fresh.to_text() != ckpt.config.to_text())
                throw InvalidInputError(
                    "train: --config disagrees with the checkpoint configuration; "
                    "resume uses the stored config (drop --config or match it)");
        }
        const int more = ckpt.config.train_steps;
        TrainResult result = resume_training(std::move(ckpt), more, &std::cout);
        const std::string path = out.empty() ? result.checkpoint.config.out_path : out;
        save_checkpoint(path, result.checkpoint);
        std::cout << "checkpoint: " << path << " (step " << result.checkpoint.train_step
                  << ")\n";
        return 0;
    }
    PipelineConfig config = PipelineConfig::from_file(config_path);
    if (seed_set) config.seed = seed;
    if (!out.empty()) config.out_path = out;
    TrainResult result = train_pipeline(config, &std::cout);
    save_checkpoint(config.out_path, result.checkpoint);
    std::cout << "checkpoint: " << config.out_path << " (step "
              << result.checkpoint.train_step << ")\n";
    return 0;
}

int run_sample(const std::string& ckpt_path, int n, const std::string& sampler, int sde_steps,
               const std::string& factor, bool no_final_denoise, const std::string& out,
               std::uint64_t seed, const std::string& cmd) {
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    SamplerConfig sc = ckpt.config.sampler_config();
    if (!sampler.empty()) {
        if (sampler == "ddpm")
            sc.kind = SamplerKind::Ddpm;
        else if (sampler == "sde")
            sc.kind = SamplerKind::Sde;
        else
            throw InvalidInputError("sample: --sampler must be ddpm|sde");
    }
    if (sde_steps > 0) sc.sde_steps = sde_steps;
    if (!factor.empty()) {
        if (factor == "one")
            sc.sde_score_factor = SdeScoreFactor::One;
        else if (factor == "half")
            sc.sde_score_factor = SdeScoreFactor::Half;
        else
            throw InvalidInputError("sample: --score-factor must be one|half");
    }
    if (no_final_denoise) sc.final_denoise = false;

    Rng rng(seed);
    const auto samples = generate_samples(ckpt, n, sc, rng);
    write_samples_csv(out, samples, cmd,
                      "per-sample channel means resampled from the training mean pool");
    std::cout << "wrote " << samples.size() << " samples to " << out << "\n";
    return 0;
}

int run_metrics(const std::string& real_path, const std::string& synth_path, int length,
                int stride, bool header) {
    const auto real = load_series(real_path, length, stride, header);
    const auto synth = load_series(synth_path, length, stride, header);
    bool warned = false;
    const double corr = correlational_score(real, synth, &warned);
    if (warned)
        std::cerr << "warning: constant channel hit the correlation std floor\n";
    const double sdd = spectral_density_distance(real, synth);
    const auto w1 = marginal_wasserstein1(real, synth);

    std::cout << "correlational_score\t" << corr << "\n";
    std::cout << "spectral_density_distance\t" << sdd << "\n";
    for (size_t d = 0; d < w1.size(); ++d)
        std::cout << "marginal_wasserstein1.ch" << d << "\t" << w1[d] << "\n";
    return 0;
}

int run_verify(const std::vector<std::string>& only, long draws, std::uint64_t seed,
               bool skip_sde) {
    SuiteOptions options;
    options.seed = seed;
    options.n_draws = draws;
    options.include_sde_arbiter = !skip_sde;
    const auto reports = run_verification_suite(options);

    std::cout << "check\tparams\tstat\tdeviation\ttolerance\tverdict\twall_s\n";
    bool healthy = true;
    int printed = 0;
    for (const auto& rep : reports) {
        if (!only.empty()) {
            bool wanted = false;
            for (const auto& name : only) wanted |= rep.name.find(name) != std::string::npos;
            if (!wanted) continue;
        }
        std::cout << report_rows_tsv(rep);
        ++printed;
        if (!rep.informational && !rep.ok()) healthy = false;
    }
    if (!only.empty() && printed == 0)
        throw InvalidInputError("verify: no check matches the given --check filters");
    std::cout << (healthy ? "verify: all checks healthy\n" : "verify: FAILURES present\n");
    return healthy ? 0 : 1;
}

int run_flops(const std::string& lengths_csv, int width, bool width_eq_length, int blocks,
              int heads, bool measure, int reps) {
    std::vector<int> lengths;
    std::stringstream ss(lengths_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) lengths.push_back(std::stoi(tok));
    if (lengths.empty()) throw InvalidInputError("flops: --lengths is empty");

    std::cout << "# convention: 1 multiply-add = 1 FLOP; attention core 2 L^2 C per block; "
                 "linear/FFN 8 L C^2 per block; FFT overhead 2*5*L*log2(L) per sample\n";
    std::cout << "# savings_total covers attention + FFT overhead (linear is iso-FLOPs); "
                 "width rule: "
              << (width_eq_length ? "C = L" : "fixed C") << "\n";
    std::cout << "L\tC\tattn_temporal\tattn_pacodi\tlinear_temporal\tlinear_pacodi\t"
                 "fft_overhead\tsavings_attn\tsavings_total\n";
    std::vector<int> widths;
    for (int L : lengths) widths.push_back(width_eq_length ? L : width);
    for (size_t i = 0; i < lengths.size(); ++i) {
        const FlopsBreakdown fb = count_flops(lengths[i], widths[i], blocks, heads);
        std::cout << fb.sequence_length << "\t" << fb.width << "\t"
                  << fb.attention_flops_temporal << "\t" << fb.attention_flops_pacodi << "\t"
                  << fb.linear_flops_temporal << "\t" << fb.linear_flops_pacodi << "\t"
                  << fb.fft_overhead_flops << "\t" << fb.savings_ratio_attention << "\t"
                  << fb.savings_ratio_total << "\n";
    }
    std::cout << savings_sparkline(savings_curve(lengths, widths, blocks, heads)) << "\n";

    if (measure) {
        std::cout << "L\ttemporal_ms\tpacodi_ms\n";
        for (const auto& p : measure_wall_time(lengths, width_eq_length ? 0 : width, blocks,
                                               heads, reps)) {
            std::cout << p.sequence_length << "\t" << p.temporal_ms << "\t" << p.pacodi_ms
                      << "\n";
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pacodi: parallel complex diffusion engine for time series"};
    app.require_subcommand(1);

    std::uint64_t seed = 1;
    bool seed_set = false;
    app.add_flag_callback("--version", [] {
        std::cout << "pacodi 1.0\n";
        std::exit(0);
    });

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "synthesize a dataset file");
    std::string gen_kind = "sines", gen_out = "dataset.csv";
    int gen_n = 10000, gen_len = 24, gen_ch = 5, gen_bin = 4;
    gen->add_option("--kind", gen_kind, "sines|single-tone");
    gen->add_option("--n", gen_n, "sample count");
    gen->add_option("--length", gen_len, "window length L");
    gen->add_option("--channels", gen_ch, "channel count D");
    gen->add_option("--tone-bin", gen_bin, "frequency bin for single-tone");
    gen->add_option("--out", gen_out, "output samples file")->required();
    gen->add_option("--seed", seed)->each([&](const std::string&) { seed_set = true; });

    // train
    auto* train = app.add_subcommand("train", "train from a configuration file");
    std::string train_config, train_out, train_resume;
    train->add_option("--config", train_config, "key=value configuration file");
    train->add_option("--out", train_out, "checkpoint output path override");
    train->add_option("--resume", train_resume, "checkpoint to continue from");
    train->add_option("--seed", seed)->each([&](const std::string&) { seed_set = true; });

    // sample
    auto* sample = app.add_subcommand("sample", "generate series from a checkpoint");
    std::string sample_ckpt, sample_out = "samples.csv", sample_kind, sample_factor;
    int sample_n = 64, sample_sde_steps = 0;
    bool sample_no_fd = false;
    sample->add_option("--checkpoint", sample_ckpt)->required();
    sample->add_option("--n", sample_n, "number of series");
    sample->add_option("--sampler", sample_kind, "ddpm|sde (default: checkpoint config)");
    sample->add_option("--sde-steps", sample_sde_steps, "Euler-Maruyama grid size");
    sample->add_option("--score-factor", sample_factor, "one|half");
    sample->add_flag("--no-final-denoise", sample_no_fd);
    sample->add_option("--out", sample_out, "output samples file");
    sample->add_option("--seed", seed)->each([&](const std::string&) { seed_set = true; });

    // metrics
    auto* metrics = app.add_subcommand("metrics", "compare a synthetic set against a real one");
    std::string metrics_real, metrics_synth;
    int metrics_len = 0, metrics_stride = 1;
    bool metrics_header = false;
    metrics->add_option("--real", metrics_real)->required();
    metrics->add_option("--synth", metrics_synth)->required();
    metrics->add_option("--length", metrics_len, "window length for raw CSV inputs");
    metrics->add_option("--stride", metrics_stride, "window stride for raw CSV inputs");
    metrics->add_flag("--header", metrics_header, "raw CSV has a header row");

    // verify
    auto* verify = app.add_subcommand("verify", "run the theorem verification suite");
    std::vector<std::string> verify_only;
    long verify_draws = 100000;
    bool verify_skip_sde = false;
    verify->add_option("--check", verify_only, "run only checks whose name contains this");
    verify->add_option("--draws", verify_draws, "Monte Carlo draws per estimate");
    verify->add_flag("--skip-sde", verify_skip_sde, "skip the slow SDE arbiter checks");
    verify->add_option("--seed", seed)->each([&](const std::string&) { seed_set = true; });

    // flops
    auto* flops = app.add_subcommand("flops", "analytic complexity accounting");
    std::string flops_lengths = "24,48,96,128,256,512,1024,2048,4096";
    int flops_width = 64, flops_blocks = 1, flops_heads = 4, flops_reps = 5;
    bool flops_ceql = false, flops_measure = false;
    flops->add_option("--lengths", flops_lengths, "comma-separated sequence lengths");
    flops->add_option("--width", flops_width, "model width C");
    flops->add_flag("--width-eq-length", flops_ceql, "scale C with L (the curve regime)");
    flops->add_flag("--measure", flops_measure, "also time real forward passes");
    flops->add_option("--reps", flops_reps, "timing repetitions (median)");
    flops->add_option("--blocks", flops_blocks);
    flops->add_option("--heads", flops_heads);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    const std::uint64_t eff_seed = seed_set ? seed : 1;
    try {
        if (gen->parsed())
            return run_gen_data(gen_kind, gen_n, gen_len, gen_ch, gen_bin, gen_out, eff_seed,
                                command_line(argc, argv));
        if (train->parsed()) {
            if (train_config.empty() && train_resume.empty())
                throw InvalidInputError("train: --config or --resume is required");
            return run_train(train_config, seed, seed_set, train_out, train_resume);
        }
        if (sample->parsed())
            return run_sample(sample_ckpt, sample_n, sample_kind, sample_sde_steps,
                              sample_factor, sample_no_fd, sample_out, eff_seed,
                              command_line(argc, argv));
        if (metrics->parsed())
            return run_metrics(metrics_real, metrics_synth, metrics_len, metrics_stride,
                               metrics_header);
        if (verify->parsed())
            return run_verify(verify_only, verify_draws, seed_set ? seed : 20240901,
                              verify_skip_sde);
        if (flops->parsed())
            return run_flops(flops_lengths, flops_width, flops_ceql, flops_blocks, flops_heads,
                             flops_measure, flops_reps);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
