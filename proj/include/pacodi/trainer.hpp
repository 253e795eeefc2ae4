#pragma once

#include "pacodi/checkpoint.hpp"

#include <ostream>
#include <vector>

namespace pacodi {

// Synthesize or load the dataset named by the config. Not yet normalized.
Dataset build_dataset(const PipelineConfig& config);

struct TrainResult {
    Checkpoint checkpoint;
    std::vector<LossReport> log;
};

// Full training orchestration: dataset, normalization, seeded init, the step
// loop with periodic checkpointing, tab-separated per-step log lines (step,
// loss_real, loss_imag, total, wall seconds) to *log_stream when given.
TrainResult train_pipeline(const PipelineConfig& config, std::ostream* log_stream);

// Continue a loaded checkpoint for additional steps; bit-compatible with an
// uninterrupted run of the same total length.
TrainResult resume_training(Checkpoint checkpoint, int additional_steps,
                            std::ostream* log_stream);

// Draw generated series from a checkpoint (de-normalized; per-sample means
// resampled from the training pool). Sampler settings from the config inside
// the checkpoint unless overridden.
std::vector<TemporalSeries> generate_samples(const Checkpoint& checkpoint, int n_samples,
                                             const SamplerConfig& sampler, Rng& rng);

} // namespace pacodi
