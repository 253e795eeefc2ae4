#include "pacodi/objective.hpp"

#include "pacodi/spectral_transform.hpp"

#include <cmath>
#include <sstream>

namespace pacodi {

SpectralState make_compressed(Mat real, Mat imag, int source_length) {
    if (!real.same_shape(imag))
        throw InvalidInputError("make_compressed: real/imag shape mismatch");
    if (real.rows != compressed_bins(source_length))
        throw InvalidInputError("make_compressed: bin count inconsistent with source length");
    return SpectralState(std::move(real), std::move(imag), SpectralForm::Compressed,
                         source_length);
}

namespace {

void require_compressed_pair(const SpectralState& a, const SpectralState& b,
                             const SpectralNoiseModel& model, const char* who) {
    if (a.form != SpectralForm::Compressed || b.form != SpectralForm::Compressed)
        throw FormError(std::string(who) + ": expected compressed states");
    if (a.bins() != model.bins() || !a.real_part.same_shape(b.real_part) ||
        !a.imag_part.same_shape(b.imag_part))
        throw InvalidInputError(std::string(who) + ": shape mismatch");
}

} // namespace

LossReport discrete_loss(const SpectralState& eps_hat, const SpectralState& eps_true, int t,
                         const NoiseSchedule& schedule, const SpectralNoiseModel& model,
                         WeightingMode weighting) {
    require_compressed_pair(eps_hat, eps_true, model, "discrete_loss");
    const double lambda = schedule.weight(t, weighting);
    const int K = eps_hat.bins();
    const int D = eps_hat.channels();
    double lr = 0.0, li = 0.0;
    for (int k = 0; k < K; ++k)
        for (int d = 0; d < D; ++d) {
            const double rr = eps_hat.real_part(k, d) - eps_true.real_part(k, d);
            const double ri = eps_hat.imag_part(k, d) - eps_true.imag_part(k, d);
            lr += model.weight_real[k] * rr * rr;
            li += model.weight_imag[k] * ri * ri;
        }
    LossReport rep;
    rep.loss_real = lambda * lr;
    rep.loss_imag = lambda * li;
    rep.total = rep.loss_real + rep.loss_imag;
    rep.weighting = weighting;
    rep.step = t;
    return rep;
}

SpectralState noise_to_score(const SpectralState& eps, int t, const NoiseSchedule& schedule,
                             const SpectralNoiseModel& model) {
    if (eps.form != SpectralForm::Compressed)
        throw FormError("noise_to_score: expected compressed state");
    const double ab = schedule.alpha_bar(t);
    if (!(ab < 1.0))
        throw InvalidInputError("noise_to_score: alpha_bar(t) == 1, score undefined");
    const double inv = 1.0 / std::sqrt(1.0 - ab);
    SpectralState score = eps;
    const int K = eps.bins();
    const int D = eps.channels();
    for (int k = 0; k < K; ++k)
        for (int d = 0; d < D; ++d) {
            score.real_part(k, d) = -model.weight_real[k] * eps.real_part(k, d) * inv;
            score.imag_part(k, d) = -model.weight_imag[k] * eps.imag_part(k, d) * inv;
        }
    return score;
}

LossReport continuous_loss(const SpectralState& score_hat, const SpectralState& eps_true, int t,
                           const NoiseSchedule& schedule, const SpectralNoiseModel& model,
                           WeightingMode weighting) {
    require_compressed_pair(score_hat, eps_true, model, "continuous_loss");
    const double lambda = weighting == WeightingMode::Simple
                              ? 1.0
                              : schedule.elbo_weight(t) * (1.0 - schedule.alpha_bar(t));
    const SpectralState score_true = noise_to_score(eps_true, t, schedule, model);
    const int K = score_hat.bins();
    const int D = score_hat.channels();
    double lr = 0.0, li = 0.0;
    for (int k = 0; k < K; ++k)
        for (int d = 0; d < D; ++d) {
            const double rr = score_hat.real_part(k, d) - score_true.real_part(k, d);
            const double ri = score_hat.imag_part(k, d) - score_true.imag_part(k, d);
            lr += model.var_real[k] * rr * rr;
            li += model.var_imag[k] * ri * ri;
        }
    LossReport rep;
    rep.loss_real = lambda * lr;
    rep.loss_imag = lambda * li;
    rep.total = rep.loss_real + rep.loss_imag;
    rep.weighting = weighting;
    rep.step = t;
    return rep;
}

AdamState make_adam_state(const DenoiserParams& params) {
    AdamState st;
    st.m = zeros_like(params);
    st.v = zeros_like(params);
    st.step = 0;
    return st;
}

void adam_step(DenoiserParams& params, AdamState& state, const GradientBundle& grads,
               const AdamConfig& cfg) {
    state.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));

    // Walk the three bundles in lockstep; enumeration order is fixed.
    std::vector<Mat*> pm, mm, vm;
    std::vector<const Mat*> gm;
    params.for_each_tensor([&](const std::string&, Mat& m) { pm.push_back(&m); });
    state.m.for_each_tensor([&](const std::string&, Mat& m) { mm.push_back(&m); });
    state.v.for_each_tensor([&](const std::string&, Mat& m) { vm.push_back(&m); });
    grads.for_each_tensor([&](const std::string&, const Mat& m) { gm.push_back(&m); });

    for (size_t i = 0; i < pm.size(); ++i) {
        Mat& p = *pm[i];
        Mat& m = *mm[i];
        Mat& v = *vm[i];
        const Mat& g = *gm[i];
        for (size_t j = 0; j < p.a.size(); ++j) {
            m.a[j] = cfg.beta1 * m.a[j] + (1.0 - cfg.beta1) * g.a[j];
            v.a[j] = cfg.beta2 * v.a[j] + (1.0 - cfg.beta2) * g.a[j] * g.a[j];
            const double mhat = m.a[j] / bc1;
            const double vhat = v.a[j] / bc2;
            p.a[j] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

LossReport training_step(DenoiserParams& params, AdamState& adam,
                         const std::vector<const TemporalSeries*>& batch,
                         const NoiseSchedule& schedule, const SpectralNoiseModel& model, Rng& rng,
                         const TrainStepOptions& options) {
    if (batch.empty()) throw InvalidInputError("training_step: empty batch");
    const int B = static_cast<int>(batch.size());
    const int T = schedule.steps();
    const std::uint64_t step_seed = rng.next_u64();

    std::vector<GradientBundle> grads(B);
    std::vector<LossReport> reports(B);

#pragma omp parallel for schedule(dynamic)
    for (int b = 0; b < B; ++b) {
        Rng rb(mix_seed(step_seed, static_cast<std::uint64_t>(b)));
        int t = 1 + static_cast<int>(rb.uniform() * T);
        if (t > T) t = T;

        const SpectralState origin = compress(dft(*batch[b]));
        const DiffusedSample ds = forward_marginal(origin, t, schedule, model, rb);

        DenoiserCache cache;
        const DenoiserOutput out =
            denoiser_forward(params, ds.state.real_part, ds.state.imag_part, t, T, &cache);

        const SpectralState eps_hat =
            make_compressed(out.eps_r, out.eps_i, model.length);
        reports[b] = discrete_loss(eps_hat, ds.injected_noise, t, schedule, model,
                                   options.weighting);

        // d loss / d eps_hat, with the 1/B batch-mean factor folded in.
        const double lambda = schedule.weight(t, options.weighting);
        const int K = eps_hat.bins();
        const int D = eps_hat.channels();
        Mat dr(K, D), di(K, D);
        for (int k = 0; k < K; ++k)
            for (int d = 0; d < D; ++d) {
                dr(k, d) = 2.0 * lambda * model.weight_real[k] *
                           (eps_hat.real_part(k, d) - ds.injected_noise.real_part(k, d)) / B;
                di(k, d) = 2.0 * lambda * model.weight_imag[k] *
                           (eps_hat.imag_part(k, d) - ds.injected_noise.imag_part(k, d)) / B;
            }
        grads[b] = denoiser_backward(params, cache, dr, di);
    }

    // Combine in index order: the sum does not depend on the schedule above.
    GradientBundle total = std::move(grads[0]);
    for (int b = 1; b < B; ++b) {
        std::vector<Mat*> dst;
        std::vector<const Mat*> src;
        total.for_each_tensor([&](const std::string&, Mat& m) { dst.push_back(&m); });
        grads[b].for_each_tensor([&](const std::string&, const Mat& m) { src.push_back(&m); });
        for (size_t i = 0; i < dst.size(); ++i)
            for (size_t j = 0; j < dst[i]->a.size(); ++j) dst[i]->a[j] += src[i]->a[j];
    }

    LossReport mean;
    mean.weighting = options.weighting;
    for (const auto& r : reports) {
        mean.loss_real += r.loss_real / B;
        mean.loss_imag += r.loss_imag / B;
    }
    mean.total = mean.loss_real + mean.loss_imag;
    mean.step = static_cast<int>(adam.step + 1);

    if (!std::isfinite(mean.total)) {
        std::ostringstream oss;
        oss << "training_step: non-finite loss at optimizer step " << adam.step + 1
            << " (loss_real=" << mean.loss_real << ", loss_imag=" << mean.loss_imag << ")";
        throw std::runtime_error(oss.str());
    }

    adam_step(params, adam, total, options.adam);
    return mean;
}

} // namespace pacodi
