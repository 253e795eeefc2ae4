#include "pacodi/reverse_sampler.hpp"

#include "pacodi/objective.hpp"
#include "pacodi/spectral_transform.hpp"

#include <cmath>

namespace pacodi {

PosteriorParams posterior_params(double x_t, double eps_hat, int t,
                                 const NoiseSchedule& schedule) {
    if (t < 1 || t > schedule.steps())
        throw InvalidInputError("posterior_params: step out of range");
    const double a = schedule.alpha(t);
    const double ab = schedule.alpha_bar(t);
    const double ab_prev = schedule.alpha_bar(t - 1);

    PosteriorParams out;
    out.mean = (x_t - (1.0 - a) / std::sqrt(1.0 - ab) * eps_hat) / std::sqrt(a);
    out.variance_scale = (1.0 - a) * (1.0 - ab_prev) / (1.0 - ab);
    return out;
}

SpectralState sample_prior(const SpectralNoiseModel& model, int channels, Rng& rng) {
    return compress_noise(sample_spectral_noise(model, channels, rng), model);
}

SpectralState ddpm_chain(SpectralState state, const NoisePredictor& predictor,
                         const NoiseSchedule& schedule, const SpectralNoiseModel& model,
                         Rng& rng) {
    if (state.form != SpectralForm::Compressed)
        throw FormError("ddpm_chain: expected compressed initial state");
    const int T = schedule.steps();
    const int K = state.bins();
    const int D = state.channels();

    for (int t = T; t >= 1; --t) {
        const DenoiserOutput eps = predictor(state.real_part, state.imag_part, t);
        const double a = schedule.alpha(t);
        const double ab = schedule.alpha_bar(t);
        const double ab_prev = schedule.alpha_bar(t - 1);
        const double eps_coef = (1.0 - a) / std::sqrt(1.0 - ab);
        const double inv_sqrt_a = 1.0 / std::sqrt(a);
        const double vscale = (1.0 - a) * (1.0 - ab_prev) / (1.0 - ab);

        SpectralState noise;
        const bool add_noise = t > 1 && vscale > 0.0;
        if (add_noise) noise = sample_prior(model, D, rng);
        const double nscale = add_noise ? std::sqrt(vscale) : 0.0;

        for (int k = 0; k < K; ++k)
            for (int d = 0; d < D; ++d) {
                double r = inv_sqrt_a * (state.real_part(k, d) - eps_coef * eps.eps_r(k, d));
                double i = inv_sqrt_a * (state.imag_part(k, d) - eps_coef * eps.eps_i(k, d));
                if (add_noise) {
                    r += nscale * noise.real_part(k, d);
                    i += nscale * noise.imag_part(k, d);
                }
                state.real_part(k, d) = r;
                state.imag_part(k, d) = i;
            }
    }
    return state;
}

SpectralState sde_integrate(SpectralState state, const ScoreFn& score_fn,
                            const NoiseSchedule& schedule, const SpectralNoiseModel& model,
                            const SamplerConfig& config, Rng& rng) {
    if (state.form != SpectralForm::Compressed)
        throw FormError("sde_integrate: expected compressed initial state");
    if (config.sde_steps < 2)
        throw InvalidInputError("sde_integrate: sde_steps must be >= 2");

    const int N = config.sde_steps;
    const double ds = 1.0 / N;
    const double c = config.sde_score_factor == SdeScoreFactor::Half ? 0.5 : 1.0;
    const int K = state.bins();
    const int D = state.channels();

    Mat score_r(K, D), score_i(K, D);
    for (int n = 0; n < N; ++n) {
        const double s = 1.0 - n * ds;
        const int t = schedule.index_of_time(s);
        const double beta = schedule.beta_continuous(s);

        score_r.set_zero();
        score_i.set_zero();
        score_fn(state.real_part, state.imag_part, s, t, score_r, score_i);

        const bool last = n == N - 1;
        const bool stochastic = !(last && config.final_denoise);
        SpectralState noise;
        if (stochastic) noise = sample_prior(model, D, rng);
        const double nscale = stochastic ? std::sqrt(beta * ds) : 0.0;

        for (int k = 0; k < K; ++k) {
            const double vr = model.var_real[k];
            const double vi = model.var_imag[k];
            for (int d = 0; d < D; ++d) {
                // Backward step of dX = [-1/2 beta X - c beta Sigma score] dt,
                // integrated from s down to s - ds.
                double r = state.real_part(k, d);
                double i = state.imag_part(k, d);
                r += ds * (0.5 * beta * r + c * beta * vr * score_r(k, d));
                i += ds * (0.5 * beta * i + c * beta * vi * score_i(k, d));
                if (stochastic) {
                    r += nscale * noise.real_part(k, d);
                    i += nscale * noise.imag_part(k, d);
                }
                state.real_part(k, d) = r;
                state.imag_part(k, d) = i;
            }
        }
    }
    return state;
}

namespace {

TemporalSeries synthesize(const SpectralState& compressed) {
    return idft(decompress(compressed));
}

NoisePredictor wrap_params(const DenoiserParams& params, int total_steps) {
    return [&params, total_steps](const Mat& R, const Mat& I, int t) {
        return denoiser_forward(params, R, I, t, total_steps);
    };
}

} // namespace

TemporalSeries ddpm_sample(const DenoiserParams& params, const NoiseSchedule& schedule,
                           const SpectralNoiseModel& model, const SamplerConfig& /*config*/,
                           int channels, Rng& rng) {
    SpectralState init = sample_prior(model, channels, rng);
    SpectralState terminal =
        ddpm_chain(std::move(init), wrap_params(params, schedule.steps()), schedule, model, rng);
    return synthesize(terminal);
}

TemporalSeries sde_sample(const DenoiserParams& params, const NoiseSchedule& schedule,
                          const SpectralNoiseModel& model, const SamplerConfig& config,
                          int channels, Rng& rng) {
    SpectralState init = sample_prior(model, channels, rng);
    const int T = schedule.steps();
    ScoreFn score_fn = [&](const Mat& R, const Mat& I, double /*s*/, int t, Mat& sr, Mat& si) {
        const DenoiserOutput out = denoiser_forward(params, R, I, t, T);
        const SpectralState score = noise_to_score(
            make_compressed(out.eps_r, out.eps_i, model.length), t, schedule, model);
        sr = score.real_part;
        si = score.imag_part;
    };
    SpectralState terminal =
        sde_integrate(std::move(init), score_fn, schedule, model, config, rng);
    return synthesize(terminal);
}

} // namespace pacodi
