#include "pacodi/forward_process.hpp"

#include "pacodi/spectral_transform.hpp"

#include <cmath>

namespace pacodi {

namespace {

SpectralState fresh_noise(SpectralForm form, const SpectralNoiseModel& model, int channels,
                          Rng& rng) {
    SpectralState full = sample_spectral_noise(model, channels, rng);
    if (form == SpectralForm::Full) return full;
    return compress_noise(full, model);
}

} // namespace

SpectralState forward_step(const SpectralState& prev, int t, const NoiseSchedule& schedule,
                           const SpectralNoiseModel& model, Rng& rng) {
    if (t < 1 || t > schedule.steps())
        throw InvalidInputError("forward_step: step out of range");
    const double beta = schedule.beta(t);
    const double drift = std::sqrt(1.0 - beta);
    const double diff = std::sqrt(beta);

    SpectralState noise = fresh_noise(prev.form, model, prev.channels(), rng);
    SpectralState out = prev;
    for (size_t i = 0; i < out.real_part.a.size(); ++i) {
        out.real_part.a[i] = drift * prev.real_part.a[i] + diff * noise.real_part.a[i];
        out.imag_part.a[i] = drift * prev.imag_part.a[i] + diff * noise.imag_part.a[i];
    }
    return out;
}

DiffusedSample forward_marginal(const SpectralState& origin, int t, const NoiseSchedule& schedule,
                                const SpectralNoiseModel& model, Rng& rng) {
    if (origin.form != SpectralForm::Compressed)
        throw FormError("forward_marginal: origin must be in compressed form");
    const double ab = schedule.alpha_bar(t);
    const double a0 = std::sqrt(ab);
    const double a1 = std::sqrt(1.0 - ab);

    DiffusedSample out;
    out.step = t;
    out.origin = origin;
    out.injected_noise = fresh_noise(SpectralForm::Compressed, model, origin.channels(), rng);
    out.state = origin;
    for (size_t i = 0; i < out.state.real_part.a.size(); ++i) {
        out.state.real_part.a[i] =
            a0 * origin.real_part.a[i] + a1 * out.injected_noise.real_part.a[i];
        out.state.imag_part.a[i] =
            a0 * origin.imag_part.a[i] + a1 * out.injected_noise.imag_part.a[i];
    }
    return out;
}

TemporalSeries temporal_forward_marginal(const TemporalSeries& x0, int t,
                                         const NoiseSchedule& schedule, Rng& rng, double sigma) {
    const double ab = t == 0 ? 1.0 : schedule.alpha_bar(t);
    const double a0 = std::sqrt(ab);
    const double a1 = std::sqrt(1.0 - ab);
    TemporalSeries out(x0.length(), x0.channels());
    for (size_t i = 0; i < out.values.a.size(); ++i)
        out.values.a[i] = a0 * x0.values.a[i] + a1 * sigma * rng.normal();
    return out;
}

} // namespace pacodi
