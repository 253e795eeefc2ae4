#include "pacodi/trainer.hpp"

#include "pacodi/spectral_transform.hpp"

#include <chrono>
#include <cmath>
#include <iostream>

namespace pacodi {

Dataset build_dataset(const PipelineConfig& config) {
    if (config.data_kind == "sines") {
        Rng rng(config.data_seed);
        return gen_sines(config.data_n, config.length, config.channels, rng);
    }
    if (config.data_kind == "single-tone") {
        Rng rng(config.data_seed);
        return gen_single_tone(config.data_n, config.length, config.channels, config.tone_bin,
                               rng);
    }
    if (config.data_kind == "csv")
        return ingest_csv(config.data_path, config.length, config.stride, config.csv_header);
    if (config.data_kind == "samples") {
        Dataset ds;
        ds.samples = read_samples_csv(config.data_path);
        return ds;
    }
    throw InvalidInputError("data.kind must be sines|single-tone|csv|samples, got '" +
                            config.data_kind + "'");
}

namespace {

struct TrainLoop {
    Dataset dataset;
    NoiseSchedule schedule;
    SpectralNoiseModel model;
    TrainStepOptions options;

    explicit TrainLoop(const PipelineConfig& config)
        : dataset(build_dataset(config)),
          schedule(NoiseSchedule::build(config.schedule_kind, config.schedule_steps,
                                        config.beta_min, config.beta_max)),
          model(build_noise_model(config.length, config.sigma)) {
        normalize(dataset);
        options.adam.lr = config.lr;
        options.weighting = config.weighting;
        if (schedule.terminal_retention_warning())
            std::cerr << "warning: alpha_bar(T) = " << schedule.alpha_bar(schedule.steps())
                      << " > 0.01; generation quality degrades with this schedule\n";
    }

    std::vector<LossReport> run(Checkpoint& ckpt, int steps, std::ostream* log_stream) {
        Rng rng = Rng::restore(ckpt.rng_state);
        std::vector<LossReport> log;
        log.reserve(steps);
        const auto t0 = std::chrono::steady_clock::now();
        const int n = static_cast<int>(dataset.samples.size());

        for (int s = 0; s < steps; ++s) {
            std::vector<const TemporalSeries*> batch(ckpt.config.batch_size);
            for (auto& ptr : batch) {
                const int idx = std::min(static_cast<int>(rng.uniform() * n), n - 1);
                ptr = &dataset.samples[idx];
            }
            const LossReport rep =
                training_step(ckpt.params, ckpt.adam, batch, schedule, model, rng, options);
            ckpt.train_step += 1;
            log.push_back(rep);

            if (log_stream && ckpt.config.log_every > 0 &&
                ckpt.train_step % ckpt.config.log_every == 0) {
                const double wall =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                (*log_stream) << ckpt.train_step << "\t" << rep.loss_real << "\t"
                              << rep.loss_imag << "\t" << rep.total << "\t" << wall << "\n";
            }
            if (ckpt.config.checkpoint_every > 0 &&
                ckpt.train_step % ckpt.config.checkpoint_every == 0) {
                ckpt.rng_state = rng.save();
                save_checkpoint(ckpt.config.out_path, ckpt);
            }
        }
        ckpt.rng_state = rng.save();
        return log;
    }
};

} // namespace

TrainResult train_pipeline(const PipelineConfig& config, std::ostream* log_stream) {
    TrainLoop loop(config);

    TrainResult result;
    result.checkpoint.config = config;
    Rng init_rng(config.seed);
    result.checkpoint.params = init_params(config.denoiser_config(), init_rng);
    result.checkpoint.adam = make_adam_state(result.checkpoint.params);
    result.checkpoint.rng_state = Rng(mix_seed(config.seed, 0x7EA1ull)).save();
    result.checkpoint.train_step = 0;
    result.checkpoint.norm = loop.dataset.norm;

    result.log = loop.run(result.checkpoint, config.train_steps, log_stream);
    return result;
}

TrainResult resume_training(Checkpoint checkpoint, int additional_steps,
                            std::ostream* log_stream) {
    TrainLoop loop(checkpoint.config);

    TrainResult result;
    result.checkpoint = std::move(checkpoint);
    result.log = loop.run(result.checkpoint, additional_steps, log_stream);
    return result;
}

std::vector<TemporalSeries> generate_samples(const Checkpoint& checkpoint, int n_samples,
                                             const SamplerConfig& sampler, Rng& rng) {
    const PipelineConfig& config = checkpoint.config;
    const NoiseSchedule schedule = NoiseSchedule::build(
        config.schedule_kind, config.schedule_steps, config.beta_min, config.beta_max);
    const SpectralNoiseModel model = build_noise_model(config.length, config.sigma);
    const std::uint64_t base = rng.next_u64();

    std::vector<TemporalSeries> out(n_samples);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n_samples; ++i) {
        Rng stream(mix_seed(base, static_cast<std::uint64_t>(i)));
        TemporalSeries raw =
            sampler.kind == SamplerKind::Ddpm
                ? ddpm_sample(checkpoint.params, schedule, model, sampler, config.channels,
                              stream)
                : sde_sample(checkpoint.params, schedule, model, sampler, config.channels,
                             stream);
        out[i] = denormalize(raw, checkpoint.norm, draw_sample_mean(checkpoint.norm, stream));
    }
    return out;
}

} // namespace pacodi
