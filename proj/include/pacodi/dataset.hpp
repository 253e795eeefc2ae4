#pragma once

#include "pacodi/rng.hpp"
#include "pacodi/types.hpp"

#include <string>
#include <vector>

namespace pacodi {

// Dataset-level channel statistics plus the per-sample means removed by
// normalization. The means are kept so (a) stored samples round-trip exactly
// and (b) generation can draw fresh means from their empirical distribution
// (the model itself lives on the zero-DC manifold).
struct NormalizationRecord {
    std::vector<double> channel_mean; // D
    std::vector<double> channel_std;  // D (after the 1e-8 floor)
    std::vector<bool> std_floored;    // constant-channel warnings
    Mat sample_means;                 // n x D
    bool per_sample_centering = true;
};

struct Dataset {
    std::vector<TemporalSeries> samples;
    NormalizationRecord norm;
    bool normalized = false;

    int length() const { return samples.empty() ? 0 : samples.front().length(); }
    int channels() const { return samples.empty() ? 0 : samples.front().channels(); }
};

// x_d[n] = sin(2 pi f_d n + phi_d), f_d ~ U(0.02, 0.1) cycles/step,
// phi_d ~ U(0, 2 pi), drawn per sample per channel.
Dataset gen_sines(int n_samples, int length, int channels, Rng& rng);

// Every channel of every sample oscillates at exactly `bin` cycles per
// window with a random phase; the frequency-recovery benchmark.
Dataset gen_single_tone(int n_samples, int length, int channels, int bin, Rng& rng);

// Sliding windows of a numeric-column CSV (columns -> channels). Parse
// errors name the offending line.
Dataset ingest_csv(const std::string& path, int length, int stride, bool header_row);

// Per-channel dataset z-score with std floored at 1e-8, then per-sample
// per-channel mean removal (DC bin exactly 0 up to round-off). In place.
void normalize(Dataset& dataset);

// Invert normalization of one series given the per-sample mean to restore.
TemporalSeries denormalize(const TemporalSeries& series, const NormalizationRecord& norm,
                           const std::vector<double>& sample_mean);

// Exact roundtrip using the stored per-sample means.
Dataset denormalize_stored(const Dataset& dataset);

// Draw a per-sample mean vector from the empirical pool (with replacement).
std::vector<double> draw_sample_mean(const NormalizationRecord& norm, Rng& rng);

// Samples file format: '#'-prefixed header lines (format version + generating
// command), one CSV header row, then rows of sample index, step, channels.
void write_samples_csv(const std::string& path, const std::vector<TemporalSeries>& samples,
                       const std::string& command_line, const std::string& note = "");
std::vector<TemporalSeries> read_samples_csv(const std::string& path);

} // namespace pacodi
