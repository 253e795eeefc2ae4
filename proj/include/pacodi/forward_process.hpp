#pragma once

#include "pacodi/diffusion_schedule.hpp"
#include "pacodi/rng.hpp"
#include "pacodi/spectral_noise.hpp"
#include "pacodi/types.hpp"

namespace pacodi {

// One noised sample with everything the loss needs: the state, the exact
// cumulative noise that produced it, and the clean origin.
// state = sqrt(alpha_bar_t) * origin + sqrt(1 - alpha_bar_t) * injected_noise.
struct DiffusedSample {
    SpectralState state;
    SpectralState injected_noise;
    SpectralState origin;
    int step = 0;
};

// Single Markov transition X_t = sqrt(1-beta_t) X_{t-1} + sqrt(beta_t) E_t
// with freshly sampled spectral noise. Works on Full or Compressed states;
// the noise is compressed to match when needed.
SpectralState forward_step(const SpectralState& prev, int t, const NoiseSchedule& schedule,
                           const SpectralNoiseModel& model, Rng& rng);

// Closed-form marginal on the compressed manifold.
DiffusedSample forward_marginal(const SpectralState& origin, int t, const NoiseSchedule& schedule,
                                const SpectralNoiseModel& model, Rng& rng);

// Temporal-domain twin, used by the frequency/temporal equivalence checks.
TemporalSeries temporal_forward_marginal(const TemporalSeries& x0, int t,
                                         const NoiseSchedule& schedule, Rng& rng,
                                         double sigma = 1.0);

} // namespace pacodi
