#pragma once

#include "pacodi/denoiser.hpp"
#include "pacodi/diffusion_schedule.hpp"
#include "pacodi/spectral_noise.hpp"

#include <functional>

namespace pacodi {

enum class SamplerKind { Ddpm, Sde };

// Factor on the score term of the reverse-SDE drift: One is the standard
// reverse-time diffusion; Half is the literal reading of the parallel
// reverse-SDE statement. The analytic-Gaussian marginal oracle arbitrates
// (see theorem_lab); One preserves marginals and is the default.
enum class SdeScoreFactor { Half, One };

struct SamplerConfig {
    SamplerKind kind = SamplerKind::Ddpm;
    int sde_steps = 1000;
    SdeScoreFactor sde_score_factor = SdeScoreFactor::One;
    bool final_denoise = true;
};

// Coordinatewise heteroscedastic posterior q(x_{t-1} | x_t, x_0) in the
// noise parameterization:
//   mean = (x_t - (1-alpha_t)/sqrt(1-alpha_bar_t) * eps_hat) / sqrt(alpha_t)
//   variance = variance_scale * v[k],
//   variance_scale = (1-alpha_t)(1-alpha_bar_{t-1}) / (1-alpha_bar_t)
struct PosteriorParams {
    double mean = 0.0;
    double variance_scale = 0.0;
};
PosteriorParams posterior_params(double x_t, double eps_hat, int t, const NoiseSchedule& schedule);

// Noise predictor interface: (R, I, t) -> (eps_hat_r, eps_hat_i).
using NoisePredictor = std::function<DenoiserOutput(const Mat& R, const Mat& I, int t)>;

// Score interface for the SDE path: (R, I, s in [0,1], t index) -> scores.
using ScoreFn =
    std::function<void(const Mat& R, const Mat& I, double s, int t, Mat& score_r, Mat& score_i)>;

// Ancestral chain on the compressed manifold from a caller-supplied initial
// state; returns the terminal compressed state. Fresh heteroscedastic noise
// scaled by sqrt(variance_scale) is injected at every step except the last.
SpectralState ddpm_chain(SpectralState init, const NoisePredictor& predictor,
                         const NoiseSchedule& schedule, const SpectralNoiseModel& model, Rng& rng);

// Euler-Maruyama integration of the parallel reverse SDEs from s=1 to s=0.
// Per branch the drift is -1/2 beta(s) x - c beta(s) Sigma score, with the
// compressed covariance applied to the score so the diffusion operator
// matches the heteroscedastic Wiener increments; c per config. The diffusion
// increment is sqrt(beta(s) ds) times fresh spectral noise.
SpectralState sde_integrate(SpectralState init, const ScoreFn& score_fn,
                            const NoiseSchedule& schedule, const SpectralNoiseModel& model,
                            const SamplerConfig& config, Rng& rng);

// Stationary prior on the compressed manifold (variances v_r / v_i), drawn
// as the DFT of temporal noise.
SpectralState sample_prior(const SpectralNoiseModel& model, int channels, Rng& rng);

// Full generation paths: prior -> reverse dynamics -> decompress -> idft.
TemporalSeries ddpm_sample(const DenoiserParams& params, const NoiseSchedule& schedule,
                           const SpectralNoiseModel& model, const SamplerConfig& config,
                           int channels, Rng& rng);
TemporalSeries sde_sample(const DenoiserParams& params, const NoiseSchedule& schedule,
                          const SpectralNoiseModel& model, const SamplerConfig& config,
                          int channels, Rng& rng);

} // namespace pacodi
