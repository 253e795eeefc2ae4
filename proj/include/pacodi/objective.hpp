#pragma once

#include "pacodi/denoiser.hpp"
#include "pacodi/diffusion_schedule.hpp"
#include "pacodi/forward_process.hpp"
#include "pacodi/spectral_noise.hpp"

#include <vector>

namespace pacodi {

struct LossReport {
    double loss_real = 0.0;
    double loss_imag = 0.0;
    double total = 0.0;
    WeightingMode weighting = WeightingMode::Simple;
    int step = 0;
};

// Compressed-state helper for wiring network outputs into the loss API.
SpectralState make_compressed(Mat real, Mat imag, int source_length);

// Heteroscedastic noise-prediction loss, per branch:
//   loss_real = lambda_t * sum_{k,d} w_r[k] (eps_hat - eps)^2
// The zero-variance imaginary Nyquist coordinate carries weight 0.
LossReport discrete_loss(const SpectralState& eps_hat, const SpectralState& eps_true, int t,
                         const NoiseSchedule& schedule, const SpectralNoiseModel& model,
                         WeightingMode weighting);

// Score-noise identity on the compressed manifold:
//   score_r[k] = -w_r[k] * eps_r[k] / sqrt(1 - alpha_bar_t)
// The imaginary Nyquist score is defined as 0. Throws when alpha_bar_t == 1.
SpectralState noise_to_score(const SpectralState& eps, int t, const NoiseSchedule& schedule,
                             const SpectralNoiseModel& model);

// Covariance-weighted score-matching loss:
//   loss_real = lambda(t) * sum v_r[k] (score_hat - score)^2
// with lambda(t) = lambda_t * (1 - alpha_bar_t) in Elbo mode, which makes it
// agree with discrete_loss instance-wise. Simple mode uses lambda(t) = 1 and
// deliberately omits that conversion.
LossReport continuous_loss(const SpectralState& score_hat, const SpectralState& eps_true, int t,
                           const NoiseSchedule& schedule, const SpectralNoiseModel& model,
                           WeightingMode weighting);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    GradientBundle m, v;
    long step = 0;
};

AdamState make_adam_state(const DenoiserParams& params);
void adam_step(DenoiserParams& params, AdamState& state, const GradientBundle& grads,
               const AdamConfig& cfg);

struct TrainStepOptions {
    AdamConfig adam;
    WeightingMode weighting = WeightingMode::Simple;
};

// One optimizer update on a batch of (already normalized, zero-mean) series:
// per element, draw t uniform in [1,T], diffuse via forward_marginal, predict
// the injected noise, take the weighted loss, backprop, and apply Adam on the
// batch-mean gradient. Batch elements use independent RNG streams derived
// from one step seed, accumulated in index order, so results do not depend on
// thread count. Throws on non-finite loss.
LossReport training_step(DenoiserParams& params, AdamState& adam,
                         const std::vector<const TemporalSeries*>& batch,
                         const NoiseSchedule& schedule, const SpectralNoiseModel& model, Rng& rng,
                         const TrainStepOptions& options);

} // namespace pacodi
