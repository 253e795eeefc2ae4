#pragma once

#include "pacodi/dataset.hpp"

#include <vector>

namespace pacodi {

struct MetricsReport {
    double correlational_score = 0.0;
    std::vector<double> marginal_wasserstein1; // per channel
    double spectral_density_distance = 0.0;
};

// || Corr(real) - Corr(synth) ||_F / D over the D x D Pearson channel
// cross-correlation matrices (time flattened across samples). Constant
// channels are guarded by a 1e-8 std floor; *warned is set when that floor
// fires.
double correlational_score(const std::vector<TemporalSeries>& real,
                           const std::vector<TemporalSeries>& synth, bool* warned = nullptr);

// Mean over channels of sum_k |P_real[k] - P_synth[k]| where P is the mean
// squared spectrum magnitude per bin.
double spectral_density_distance(const std::vector<TemporalSeries>& real,
                                 const std::vector<TemporalSeries>& synth);

// Per-channel 1-Wasserstein distance between pooled value distributions,
// via empirical quantiles.
std::vector<double> marginal_wasserstein1(const std::vector<TemporalSeries>& real,
                                          const std::vector<TemporalSeries>& synth,
                                          int quantiles = 512);

MetricsReport compute_metrics(const std::vector<TemporalSeries>& real,
                              const std::vector<TemporalSeries>& synth);

// Index of the dominant spectral bin (1..K) by power summed over channels.
int dominant_bin(const TemporalSeries& series);

} // namespace pacodi
