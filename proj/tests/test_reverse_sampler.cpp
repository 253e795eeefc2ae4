#include <doctest.h>

#include "pacodi/objective.hpp"
#include "pacodi/reverse_sampler.hpp"
#include "pacodi/spectral_transform.hpp"
#include "pacodi/theorem_lab.hpp"

#include <cmath>
#include <vector>

using namespace pacodi;

TEST_CASE("posterior parameters, brute-force Bayes oracle") {
    // Chain with alpha_t = 0.9, alpha_bar_t = 0.72 (so alpha_bar_{t-1} = 0.8):
    // betas [0.2, 0.1].
    // The oracle: complete the square on the 1-D Gaussian product
    //   N(x_t; sqrt(a) x_{t-1}, (1-a)) * N(x_{t-1}; sqrt(ab_prev) x0, (1-ab_prev)).
    const double a = 0.9, ab = 0.72, ab_prev = 0.8;
    const double x_t = 1.0, eps_hat = 0.5;
    // x0 implied by (x_t, eps_hat): x0 = (x_t - sqrt(1-ab) eps)/sqrt(ab).
    const double x0 = (x_t - std::sqrt(1.0 - ab) * eps_hat) / std::sqrt(ab);
    const double prec = a / (1.0 - a) + 1.0 / (1.0 - ab_prev);
    const double oracle_var = 1.0 / prec;
    const double oracle_mean =
        oracle_var * (std::sqrt(a) / (1.0 - a) * x_t + std::sqrt(ab_prev) / (1.0 - ab_prev) * x0);

    // Library path needs a schedule realizing those alphas; betas [0.2, 0.1]
    // are decreasing, so drive the formula through a hand-built pair check.
    const PosteriorParams pp = [&] {
        // posterior_params only reads alpha(t), alpha_bar(t), alpha_bar(t-1);
        // cosine schedules can hit decreasing betas. Simpler: evaluate the
        // formulas directly and cross-check against the library on a valid
        // increasing schedule below.
        PosteriorParams out;
        out.mean = (x_t - (1.0 - a) / std::sqrt(1.0 - ab) * eps_hat) / std::sqrt(a);
        out.variance_scale = (1.0 - a) * (1.0 - ab_prev) / (1.0 - ab);
        return out;
    }();
    CHECK(pp.mean == doctest::Approx(oracle_mean).epsilon(1e-12));
    CHECK(pp.mean == doctest::Approx(0.9544901692782604).epsilon(1e-12));
    CHECK(pp.variance_scale == doctest::Approx(oracle_var).epsilon(1e-12));
    CHECK(pp.variance_scale == doctest::Approx(0.1 * 0.2 / 0.28).epsilon(1e-12));

    // Library agreement over a real schedule, same brute-force oracle.
    const NoiseSchedule sch = NoiseSchedule::build(ScheduleKind::Linear, 6, 0.05, 0.3);
    for (int t = 2; t <= 6; ++t) {
        const double at = sch.alpha(t), abt = sch.alpha_bar(t), abp = sch.alpha_bar(t - 1);
        const double xt = 0.7, eh = -0.3;
        const double x0t = (xt - std::sqrt(1.0 - abt) * eh) / std::sqrt(abt);
        const double p2 = at / (1.0 - at) + 1.0 / (1.0 - abp);
        const double om = (std::sqrt(at) / (1.0 - at) * xt +
                           std::sqrt(abp) / (1.0 - abp) * x0t) / p2;
        const PosteriorParams lib = posterior_params(xt, eh, t, sch);
        CHECK(lib.mean == doctest::Approx(om).epsilon(1e-10));
        CHECK(lib.variance_scale == doctest::Approx(1.0 / p2).epsilon(1e-10));
    }
}

TEST_CASE("posterior edge cases") {
    const NoiseSchedule sch = NoiseSchedule::build(ScheduleKind::Linear, 4, 0.1, 0.3);
    SUBCASE("zero noise prediction rescales by 1/sqrt(alpha)") {
        const PosteriorParams pp = posterior_params(2.0, 0.0, 3, sch);
        CHECK(pp.mean == doctest::Approx(2.0 / std::sqrt(sch.alpha(3))).epsilon(1e-14));
    }
    SUBCASE("t=1 is deterministic under alpha_bar(0)=1") {
        const PosteriorParams pp = posterior_params(1.0, 0.2, 1, sch);
        CHECK(pp.variance_scale == 0.0);
    }
    SUBCASE("step bounds") {
        CHECK_THROWS_AS(posterior_params(0.0, 0.0, 0, sch), InvalidInputError);
        CHECK_THROWS_AS(posterior_params(0.0, 0.0, 5, sch), InvalidInputError);
    }
}

TEST_CASE("zero-head chain matches the closed-form linear recursion") {
    // With eps_hat = 0 the chain is linear-Gaussian per coordinate:
    //   V_{t-1} = V_t / alpha_t + vscale_t * v_k  (noise skipped at t=1).
    // The recursion is the oracle; the sampler ensemble must match it.
    const int L = 8, D = 1, T = 50;
    const NoiseSchedule sch = NoiseSchedule::build(ScheduleKind::Linear, T, 1e-4, 2e-2);
    const SpectralNoiseModel model = build_noise_model(L, 1.0);
    const int K = model.bins();

    std::vector<double> expect_r(K), expect_i(K);
    for (int k = 0; k < K; ++k) {
        double vr = model.var_real[k], vi = model.var_imag[k];
        for (int t = T; t >= 1; --t) {
            const double a = sch.alpha(t);
            const double vs = (1.0 - a) * (1.0 - sch.alpha_bar(t - 1)) / (1.0 - sch.alpha_bar(t));
            vr = vr / a + (t > 1 ? vs * model.var_real[k] : 0.0);
            vi = vi / a + (t > 1 ? vs * model.var_imag[k] : 0.0);
        }
        expect_r[k] = vr;
        expect_i[k] = vi;
    }

    const int n = 4000;
    NoisePredictor zero = [&](const Mat& R, const Mat&, int) {
        DenoiserOutput out;
        out.eps_r = Mat(R.rows, R.cols);
        out.eps_i = Mat(R.rows, R.cols);
        return out;
    };
    Rng rng(501);
    std::vector<double> sr(K, 0.0), sr2(K, 0.0), si(K, 0.0), si2(K, 0.0);
    for (int it = 0; it < n; ++it) {
        Rng stream = rng.split(it);
        SpectralState init = sample_prior(model, D, stream);
        const SpectralState fin = ddpm_chain(std::move(init), zero, sch, model, stream);
        for (int k = 0; k < K; ++k) {
            sr[k] += fin.real_part(k, 0);
            sr2[k] += fin.real_part(k, 0) * fin.real_part(k, 0);
            si[k] += fin.imag_part(k, 0);
            si2[k] += fin.imag_part(k, 0) * fin.imag_part(k, 0);
        }
    }
    for (int k = 0; k < K; ++k) {
        const double vr = sr2[k] / n - (sr[k] / n) * (sr[k] / n);
        const double vi = si2[k] / n - (si[k] / n) * (si[k] / n);
        CHECK(std::abs(vr - expect_r[k]) < 5.0 * expect_r[k] * std::sqrt(2.0 / n));
        if (expect_i[k] > 0.0)
            CHECK(std::abs(vi - expect_i[k]) < 5.0 * expect_i[k] * std::sqrt(2.0 / n));
        else
            CHECK(vi == 0.0);
    }
}

TEST_CASE("oracle noise predictor concentrates the chain on x0") {
    // Single-point dataset: the exact posterior chain has closed-form
    // mean/variance recursions; terminal samples concentrate at x0.
    const int L = 8, D = 1, T = 100;
    const NoiseSchedule sch = NoiseSchedule::build(ScheduleKind::Linear, T, 1e-3, 5e-2);
    const SpectralNoiseModel model = build_noise_model(L, 1.0);
    const int K = model.bins();

    Rng data_rng(502);
    TemporalSeries x0(L, D);
    for (int i = 0; i < L; ++i) x0.values(i, 0) = data_rng.normal();
    double mean = 0.0;
    for (int i = 0; i < L; ++i) mean += x0.values(i, 0);
    for (int i = 0; i < L; ++i) x0.values(i, 0) -= mean / L;
    const SpectralState origin = compress(dft(x0));

    NoisePredictor oracle = [&](const Mat& R, const Mat& I, int t) {
        const double ab = sch.alpha_bar(t);
        DenoiserOutput out;
        out.eps_r = Mat(R.rows, R.cols);
        out.eps_i = Mat(R.rows, R.cols);
        for (int k = 0; k < R.rows; ++k)
            for (int d = 0; d < R.cols; ++d) {
                out.eps_r(k, d) = (R(k, d) - std::sqrt(ab) * origin.real_part(k, d)) /
                                  std::sqrt(1.0 - ab);
                out.eps_i(k, d) = (I(k, d) - std::sqrt(ab) * origin.imag_part(k, d)) /
                                  std::sqrt(1.0 - ab);
            }
        return out;
    };

    // Closed-form recursion for the mean coefficient and variance.
    // m_{t-1} = A_t m_t + B_t x0, V_{t-1} = A_t^2 V_t + vs_t v.
    std::vector<double> m_r(K), v_r(K);
    for (int k = 0; k < K; ++k) {
        double m = 0.0, v = model.var_real[k];
        for (int t = T; t >= 1; --t) {
            const double a = sch.alpha(t), ab = sch.alpha_bar(t), abp = sch.alpha_bar(t - 1);
            const double A = std::sqrt(a) * (1.0 - abp) / (1.0 - ab);
            const double B = std::sqrt(abp) * (1.0 - a) / (1.0 - ab);
            const double vs = (1.0 - a) * (1.0 - abp) / (1.0 - ab);
            m = A * m + B * origin.real_part(k, 0);
            v = A * A * v + (t > 1 ? vs * model.var_real[k] : 0.0);
        }
        m_r[k] = m;
        v_r[k] = v;
    }

    const int n = 2000;
    Rng rng(503);
    std::vector<double> sum(K, 0.0), sq(K, 0.0);
    for (int it = 0; it < n; ++it) {
        Rng stream = rng.split(it);
        SpectralState init = sample_prior(model, D, stream);
        const SpectralState fin = ddpm_chain(std::move(init), oracle, sch, model, stream);
        for (int k = 0; k < K; ++k) {
            sum[k] += fin.real_part(k, 0);
            sq[k] += fin.real_part(k, 0) * fin.real_part(k, 0);
        }
    }
    for (int k = 0; k < K; ++k) {
        const double emp_mean = sum[k] / n;
        const double emp_var = sq[k] / n - emp_mean * emp_mean;
        // Terminal law matches the recursion, and it concentrates near x0.
        CHECK(std::abs(emp_mean - m_r[k]) < 5.0 * std::sqrt(v_r[k] / n) + 1e-9);
        CHECK(std::abs(emp_var - v_r[k]) < 5.0 * v_r[k] * std::sqrt(2.0 / n) + 1e-9);
        CHECK(std::abs(m_r[k] - origin.real_part(k, 0)) < 0.05);
    }
}

TEST_CASE("samplers are deterministic and emit real series") {
    const int L = 8, D = 2, T = 20;
    DenoiserConfig cfg{.tokens = compressed_bins(L), .channels = D, .width = 16, .heads = 4,
                       .blocks = 1, .time_embed_dim = 8};
    Rng init_rng(504);
    const DenoiserParams params = init_params(cfg, init_rng);
    const NoiseSchedule sch = NoiseSchedule::build(ScheduleKind::Linear, T, 1e-3, 0.1);
    const SpectralNoiseModel model = build_noise_model(L, 1.0);
    SamplerConfig sc;
    sc.sde_steps = 40;

    SUBCASE("ddpm: fixed seed -> identical outputs; Nyquist stays zero") {
        Rng a(77), b(77);
        const TemporalSeries s1 = ddpm_sample(params, sch, model, sc, D, a);
        const TemporalSeries s2 = ddpm_sample(params, sch, model, sc, D, b);
        for (size_t i = 0; i < s1.values.a.size(); ++i)
            CHECK(s1.values.a[i] == s2.values.a[i]);

        Rng c(78);
        SpectralState init = sample_prior(model, D, c);
        NoisePredictor zero = [&](const Mat& R, const Mat&, int) {
            DenoiserOutput out;
            out.eps_r = Mat(R.rows, R.cols);
            out.eps_i = Mat(R.rows, R.cols);
            return out;
        };
        const SpectralState fin = ddpm_chain(std::move(init), zero, sch, model, c);
        for (int d = 0; d < D; ++d) CHECK(fin.imag_part(fin.bins() - 1, d) == 0.0);
    }

    SUBCASE("sde: fixed seed -> identical outputs") {
        Rng a(79), b(79);
        const TemporalSeries s1 = sde_sample(params, sch, model, sc, D, a);
        const TemporalSeries s2 = sde_sample(params, sch, model, sc, D, b);
        for (size_t i = 0; i < s1.values.a.size(); ++i)
            CHECK(s1.values.a[i] == s2.values.a[i]);
    }

    SUBCASE("synthesized series are real: imaginary residue below 1e-9") {
        Rng a(80);
        SpectralState init = sample_prior(model, D, a);
        const SpectralState fin = ddpm_chain(
            std::move(init),
            [&](const Mat& R, const Mat& I, int t) {
                return denoiser_forward(params, R, I, t, T);
            },
            sch, model, a);
        double residue = 0.0;
        idft(decompress(fin), &residue);
        CHECK(residue < 1e-9);
    }
}

TEST_CASE("sde with vanishing beta is an identity flow") {
    const int L = 8, D = 1;
    const NoiseSchedule sch = NoiseSchedule::build(ScheduleKind::Linear, 4, 1e-15, 1e-15);
    const SpectralNoiseModel model = build_noise_model(L, 1.0);
    SamplerConfig sc;
    sc.sde_steps = 16;

    Rng rng(505);
    SpectralState init = sample_prior(model, D, rng);
    const SpectralState start = init;
    ScoreFn zero_score = [](const Mat&, const Mat&, double, int, Mat&, Mat&) {};
    const SpectralState fin = sde_integrate(std::move(init), zero_score, sch, model, sc, rng);
    for (size_t i = 0; i < fin.real_part.a.size(); ++i) {
        CHECK(std::abs(fin.real_part.a[i] - start.real_part.a[i]) < 1e-6);
        CHECK(std::abs(fin.imag_part.a[i] - start.imag_part.a[i]) < 1e-6);
    }
    CHECK_THROWS_AS(
        sde_integrate(SpectralState(Mat(4, 1), Mat(4, 1), SpectralForm::Compressed, 8),
                      zero_score, sch, model, SamplerConfig{.sde_steps = 1}, rng),
        InvalidInputError);
}

TEST_CASE("analytic-Gaussian oracle: factor One preserves marginals, Half does not") {
    // Compact version of the arbiter: per-bin Gaussian data so the marginal
    // score is closed-form; integrate the reverse SDE with the analytic score
    // substituted for the network.
    const int L = 8, D = 1, T = 1000;
    const NoiseSchedule sch = NoiseSchedule::build(ScheduleKind::Linear, T, 1e-4, 2e-2);
    const SpectralNoiseModel model = build_noise_model(L, 1.0);
    const int K = model.bins();

    std::vector<double> v0_r = {3.0, 1.0, 0.5, 2.0};
    std::vector<double> v0_i = {1.0, 2.0, 0.25, 0.0}; // imaginary Nyquist is empty

    auto marginal_var = [&](int t, int k, bool real_part) {
        const double ab = sch.alpha_bar(t);
        const double v0 = real_part ? v0_r[k] : v0_i[k];
        const double v = real_part ? model.var_real[k] : model.var_imag[k];
        return ab * v0 + (1.0 - ab) * v;
    };
    ScoreFn analytic = [&](const Mat& R, const Mat& I, double, int t, Mat& sr, Mat& si) {
        for (int k = 0; k < K; ++k) {
            const double mr = marginal_var(t, k, true);
            const double mi = marginal_var(t, k, false);
            for (int d = 0; d < D; ++d) {
                sr(k, d) = -R(k, d) / mr;
                si(k, d) = mi > 0.0 ? -I(k, d) / mi : 0.0;
            }
        }
    };

    auto terminal_variances = [&](SdeScoreFactor factor, int paths, int steps,
                                  std::uint64_t seed) {
        SamplerConfig sc;
        sc.sde_steps = steps;
        sc.sde_score_factor = factor;
        sc.final_denoise = false; // pure EM for the marginal check
        std::vector<double> sum(K, 0.0), sq(K, 0.0);
        Rng rng(seed);
#pragma omp parallel for schedule(static)
        for (int it = 0; it < paths; ++it) {
            Rng stream = rng.split(it);
            Mat r(K, D), i(K, D);
            for (int k = 0; k < K; ++k) {
                r(k, 0) = std::sqrt(marginal_var(T, k, true)) * stream.normal();
                const double mi = marginal_var(T, k, false);
                i(k, 0) = mi > 0.0 ? std::sqrt(mi) * stream.normal() : 0.0;
            }
            SpectralState init = make_compressed(std::move(r), std::move(i), L);
            const SpectralState fin =
                sde_integrate(std::move(init), analytic, sch, model, sc, stream);
#pragma omp critical
            for (int k = 0; k < K; ++k) {
                sum[k] += fin.real_part(k, 0);
                sq[k] += fin.real_part(k, 0) * fin.real_part(k, 0);
            }
        }
        std::vector<double> var(K);
        for (int k = 0; k < K; ++k)
            var[k] = sq[k] / paths - (sum[k] / paths) * (sum[k] / paths);
        return var;
    };

    const auto var_one = terminal_variances(SdeScoreFactor::One, 3000, 400, 506);
    for (int k = 0; k < K; ++k)
        CHECK(std::abs(var_one[k] - v0_r[k]) < 0.12 * v0_r[k]);

    const auto var_half = terminal_variances(SdeScoreFactor::Half, 1500, 400, 507);
    double worst = 0.0;
    for (int k = 0; k < K; ++k)
        worst = std::max(worst, std::abs(var_half[k] - v0_r[k]) / v0_r[k]);
    CHECK(worst > 1.0); // terminal variance is several times the data variance
}

TEST_CASE("doubling the EM step count shrinks the terminal-variance error") {
    // Weak-convergence monotonicity, averaged across seeds so Monte Carlo
    // noise cannot flip the comparison.
    const NoiseSchedule sch = NoiseSchedule::build(ScheduleKind::Linear, 1000, 1e-4, 2e-2);
    double coarse = 0.0, fine = 0.0;
    for (std::uint64_t seed : {11ull, 22ull, 33ull}) {
        coarse += check_sde_marginal_preservation(8, 1.0, sch, 25, 10000,
                                                  SdeScoreFactor::One, 1.0, seed)
                      .stats[0]
                      .deviation / 3.0;
        fine += check_sde_marginal_preservation(8, 1.0, sch, 50, 10000,
                                                SdeScoreFactor::One, 1.0, seed)
                    .stats[0]
                    .deviation / 3.0;
    }
    CHECK(coarse > fine);
}
