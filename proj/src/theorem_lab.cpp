#include "pacodi/theorem_lab.hpp"

#include "pacodi/forward_process.hpp"
#include "pacodi/objective.hpp"
#include "pacodi/spectral_transform.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

namespace pacodi {

bool VerificationReport::passed() const {
    for (const auto& s : stats)
        if (!s.within()) return false;
    return true;
}

bool VerificationReport::ok() const { return negative_control ? !passed() : passed(); }

namespace {

constexpr long kChunk = 4096;

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

struct CovSums {
    int length = 0;
    long n = 0;
    std::vector<double> sum_r, sum_i;
    std::vector<double> rr, ii, ri;

    void init(int L) {
        length = L;
        n = 0;
        sum_r.assign(L, 0.0);
        sum_i.assign(L, 0.0);
        rr.assign(static_cast<size_t>(L) * L, 0.0);
        ii.assign(static_cast<size_t>(L) * L, 0.0);
        ri.assign(static_cast<size_t>(L) * L, 0.0);
    }
    void accumulate(const std::vector<double>& r, const std::vector<double>& i) {
        const int L = length;
        for (int k = 0; k < L; ++k) {
            sum_r[k] += r[k];
            sum_i[k] += i[k];
            for (int l = 0; l < L; ++l) {
                rr[static_cast<size_t>(k) * L + l] += r[k] * r[l];
                ii[static_cast<size_t>(k) * L + l] += i[k] * i[l];
                ri[static_cast<size_t>(k) * L + l] += r[k] * i[l];
            }
        }
        ++n;
    }
    void add(const CovSums& o) {
        for (int k = 0; k < length; ++k) {
            sum_r[k] += o.sum_r[k];
            sum_i[k] += o.sum_i[k];
        }
        for (size_t j = 0; j < rr.size(); ++j) {
            rr[j] += o.rr[j];
            ii[j] += o.ii[j];
            ri[j] += o.ri[j];
        }
        n += o.n;
    }
    double cov_rr(int k, int l) const {
        return rr[static_cast<size_t>(k) * length + l] / n -
               (sum_r[k] / n) * (sum_r[l] / n);
    }
    double cov_ii(int k, int l) const {
        return ii[static_cast<size_t>(k) * length + l] / n -
               (sum_i[k] / n) * (sum_i[l] / n);
    }
    double cov_ri(int k, int l) const {
        return ri[static_cast<size_t>(k) * length + l] / n -
               (sum_r[k] / n) * (sum_i[l] / n);
    }
};

// DrawFn: (Rng&, std::vector<double>& r, std::vector<double>& i) -> void.
// Chunked so the reduction order is fixed regardless of threading.
template <class DrawFn>
CovSums chunked_cov(int length, long n_draws, std::uint64_t seed, DrawFn&& draw) {
    const long chunks = (n_draws + kChunk - 1) / kChunk;
    std::vector<CovSums> partial(static_cast<size_t>(chunks));
#pragma omp parallel for schedule(dynamic)
    for (long c = 0; c < chunks; ++c) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(c)));
        CovSums& s = partial[static_cast<size_t>(c)];
        s.init(length);
        std::vector<double> r(length), i(length);
        const long lo = c * kChunk;
        const long hi = std::min(n_draws, lo + kChunk);
        for (long it = lo; it < hi; ++it) {
            draw(rng, r, i);
            s.accumulate(r, i);
        }
    }
    CovSums total;
    total.init(length);
    for (const auto& p : partial) total.add(p);
    return total;
}

void draw_spectral(const SpectralNoiseModel& model, Rng& rng, std::vector<double>& r,
                   std::vector<double>& i) {
    const SpectralState e = sample_spectral_noise(model, 1, rng);
    for (int k = 0; k < model.length; ++k) {
        r[k] = e.real_part(k, 0);
        i[k] = e.imag_part(k, 0);
    }
}

std::string format_params(std::initializer_list<std::pair<const char*, double>> kv,
                          std::uint64_t seed) {
    std::ostringstream oss;
    bool first = true;
    for (const auto& [key, value] : kv) {
        if (!first) oss << " ";
        first = false;
        oss << key << "=" << value;
    }
    oss << " seed=" << seed;
    return oss.str();
}

// log N(x; mu, var) for one coordinate.
double log_normal_pdf(double x, double mu, double var) {
    const double d = x - mu;
    return -0.5 * (std::log(2.0 * std::numbers::pi * var) + d * d / var);
}

// Dense multivariate Gaussian log-density via Cholesky. The generic route:
// no use of the diagonal structure, so it is independent of the factorized
// evaluation it is compared against.
double log_mvn_dense(const std::vector<double>& x, const std::vector<double>& mu, Mat cov) {
    const int m = cov.rows;
    // Cholesky factorization cov = L L^T.
    for (int j = 0; j < m; ++j) {
        for (int k = 0; k < j; ++k) {
            const double f = cov(j, k);
            for (int i = j; i < m; ++i) cov(i, j) -= cov(i, k) * f;
        }
        const double d = std::sqrt(cov(j, j));
        for (int i = j; i < m; ++i) cov(i, j) /= d;
    }
    // Solve L y = (x - mu).
    std::vector<double> y(m);
    for (int i = 0; i < m; ++i) {
        double acc = x[i] - mu[i];
        for (int k = 0; k < i; ++k) acc -= cov(i, k) * y[k];
        y[i] = acc / cov(i, i);
    }
    double quad = 0.0, logdet = 0.0;
    for (int i = 0; i < m; ++i) {
        quad += y[i] * y[i];
        logdet += 2.0 * std::log(cov(i, i));
    }
    return -0.5 * (m * std::log(2.0 * std::numbers::pi) + logdet + quad);
}

} // namespace

VerificationReport check_orthogonality(int length, double sigma, long n_draws,
                                       std::uint64_t seed) {
    Stopwatch watch;
    const SpectralNoiseModel model = build_noise_model(length, sigma);
    const CovSums sums = chunked_cov(length, n_draws, seed, [&](Rng& rng, auto& r, auto& i) {
        draw_spectral(model, rng, r, i);
    });
    double worst = 0.0;
    for (int k = 0; k < length; ++k)
        for (int l = 0; l < length; ++l) worst = std::max(worst, std::abs(sums.cov_ri(k, l)));

    VerificationReport rep;
    rep.name = "noise-orthogonality";
    rep.params = format_params({{"L", double(length)}, {"sigma", sigma}, {"N", double(n_draws)}},
                               seed);
    rep.stats.push_back({"max |cov(eps_r, eps_i)|", worst,
                         5.0 * sigma * sigma / std::sqrt(static_cast<double>(n_draws))});
    rep.wall_seconds = watch.seconds();
    return rep;
}

namespace {

VerificationReport covariance_report(const char* name, int length, double sigma, long n_draws,
                                     std::uint64_t seed, const Mat& target_r, const Mat& target_i,
                                     bool negative_control) {
    Stopwatch watch;
    const SpectralNoiseModel model = build_noise_model(length, sigma);
    const CovSums sums = chunked_cov(length, n_draws, seed, [&](Rng& rng, auto& r, auto& i) {
        draw_spectral(model, rng, r, i);
    });
    double dev_r = 0.0, dev_i = 0.0;
    for (int k = 0; k < length; ++k)
        for (int l = 0; l < length; ++l) {
            dev_r = std::max(dev_r, std::abs(sums.cov_rr(k, l) - target_r(k, l)));
            dev_i = std::max(dev_i, std::abs(sums.cov_ii(k, l) - target_i(k, l)));
        }
    const double tol = 5.0 * sigma * sigma / std::sqrt(static_cast<double>(n_draws));

    VerificationReport rep;
    rep.name = name;
    rep.params = format_params({{"L", double(length)}, {"sigma", sigma}, {"N", double(n_draws)}},
                               seed);
    rep.stats.push_back({"max |cov_r - Sigma_r|", dev_r, tol});
    rep.stats.push_back({"max |cov_i - Sigma_i|", dev_i, tol});
    rep.negative_control = negative_control;
    rep.wall_seconds = watch.seconds();
    return rep;
}

} // namespace

VerificationReport check_covariance_structure(int length, double sigma, long n_draws,
                                              std::uint64_t seed) {
    const SpectralNoiseModel model = build_noise_model(length, sigma);
    return covariance_report("covariance-structure", length, sigma, n_draws, seed, model.cov_real,
                             model.cov_imag, false);
}

VerificationReport check_covariance_negative_control(int length, double sigma, long n_draws,
                                                     std::uint64_t seed) {
    // Isotropic target: misses the X-shape entirely, so the check must fail.
    Mat wrong_r(length, length), wrong_i(length, length);
    for (int k = 0; k < length; ++k) {
        wrong_r(k, k) = sigma * sigma;
        wrong_i(k, k) = sigma * sigma;
    }
    return covariance_report("covariance-negative-control", length, sigma, n_draws, seed, wrong_r,
                             wrong_i, true);
}

VerificationReport check_additivity(int length, double sigma, double alpha, long n_draws,
                                    std::uint64_t seed) {
    Stopwatch watch;
    const SpectralNoiseModel model = build_noise_model(length, sigma);
    const double wa = std::sqrt(alpha), wb = std::sqrt(1.0 - alpha);

    const CovSums sums = chunked_cov(length, n_draws, seed, [&](Rng& rng, auto& r, auto& i) {
        const SpectralState e1 = sample_spectral_noise(model, 1, rng);
        const SpectralState e2 = sample_spectral_noise(model, 1, rng);
        for (int k = 0; k < model.length; ++k) {
            r[k] = wa * e1.real_part(k, 0) + wb * e2.real_part(k, 0);
            i[k] = wa * e1.imag_part(k, 0) + wb * e2.imag_part(k, 0);
        }
    });
    double dev_r = 0.0, dev_i = 0.0;
    for (int k = 0; k < length; ++k)
        for (int l = 0; l < length; ++l) {
            dev_r = std::max(dev_r, std::abs(sums.cov_rr(k, l) - model.cov_real(k, l)));
            dev_i = std::max(dev_i, std::abs(sums.cov_ii(k, l) - model.cov_imag(k, l)));
        }

    // DFT linearity is exact up to round-off on individual draws.
    double lin = 0.0;
    Rng rng(mix_seed(seed, 0xA11ull));
    for (int rep = 0; rep < 16; ++rep) {
        const TemporalSeries n1 = sample_temporal_noise(length, 1, sigma, rng);
        const TemporalSeries n2 = sample_temporal_noise(length, 1, sigma, rng);
        TemporalSeries mix(length, 1);
        for (int n = 0; n < length; ++n)
            mix.values(n, 0) = wa * n1.values(n, 0) + wb * n2.values(n, 0);
        const SpectralState lhs = dft(mix);
        const SpectralState s1 = dft(n1), s2 = dft(n2);
        for (int k = 0; k < length; ++k) {
            lin = std::max(lin, std::abs(lhs.real_part(k, 0) - wa * s1.real_part(k, 0) -
                                         wb * s2.real_part(k, 0)));
            lin = std::max(lin, std::abs(lhs.imag_part(k, 0) - wa * s1.imag_part(k, 0) -
                                         wb * s2.imag_part(k, 0)));
        }
    }

    const double tol = 5.0 * sigma * sigma / std::sqrt(static_cast<double>(n_draws));
    VerificationReport rep;
    rep.name = "noise-additivity";
    rep.params = format_params(
        {{"L", double(length)}, {"sigma", sigma}, {"alpha", alpha}, {"N", double(n_draws)}},
        seed);
    rep.stats.push_back({"max |cov_r(mix) - Sigma_r|", dev_r, tol});
    rep.stats.push_back({"max |cov_i(mix) - Sigma_i|", dev_i, tol});
    rep.stats.push_back({"max DFT-linearity residual", lin, 1e-12});
    rep.wall_seconds = watch.seconds();
    return rep;
}

namespace {

VerificationReport factorization_report(const char* name, int length, double sigma,
                                        const NoiseSchedule& schedule, int t, long n_draws,
                                        std::uint64_t seed, bool corrupt_quadratures,
                                        double origin_scale) {
    Stopwatch watch;
    const SpectralNoiseModel model = build_noise_model(length, sigma);
    const double ab = schedule.alpha_bar(t);
    const double a0 = std::sqrt(ab), a1 = std::sqrt(1.0 - ab);

    // One arbitrary fixed origin, from its own stream.
    Rng origin_rng(mix_seed(seed, 0xF0ull));
    TemporalSeries base(length, 1);
    for (int n = 0; n < length; ++n) base.values(n, 0) = origin_scale * origin_rng.normal();
    const SpectralState x0 = dft(base);

    const CovSums sums = chunked_cov(length, n_draws, seed, [&](Rng& rng, auto& r, auto& i) {
        const SpectralState e = sample_spectral_noise(model, 1, rng);
        for (int k = 0; k < length; ++k) {
            r[k] = a0 * x0.real_part(k, 0) + a1 * e.real_part(k, 0);
            i[k] = a0 * x0.imag_part(k, 0) + a1 * e.imag_part(k, 0);
        }
        if (corrupt_quadratures)
            for (int k = 0; k < length; ++k) i[k] = r[k];
    });
    double cross = 0.0;
    for (int k = 0; k < length; ++k)
        for (int l = 0; l < length; ++l) cross = std::max(cross, std::abs(sums.cov_ri(k, l)));

    VerificationReport rep;
    rep.name = name;
    rep.params = format_params(
        {{"L", double(length)}, {"sigma", sigma}, {"t", double(t)}, {"N", double(n_draws)}},
        seed);
    rep.stats.push_back({"max |cov(R_t, I_t) | X0|", cross,
                         5.0 * sigma * sigma / std::sqrt(static_cast<double>(n_draws))});
    rep.negative_control = corrupt_quadratures;

    if (!corrupt_quadratures) {
        // Density additivity on the compressed manifold: joint block-diagonal
        // posterior vs product of per-quadrature closed forms, both exact.
        const SpectralState x0c = [&] {
            Mat r(model.bins(), 1), i(model.bins(), 1);
            for (int k = 1; k <= model.bins(); ++k) {
                r(k - 1, 0) = x0.real_part(k, 0);
                i(k - 1, 0) = x0.imag_part(k, 0);
            }
            if (model.nyquist()) i(model.bins() - 1, 0) = 0.0;
            return make_compressed(std::move(r), std::move(i), length);
        }();
        const int K = model.bins();
        const double a = schedule.alpha(t);
        const double abp = schedule.alpha_bar(t - 1);
        const double coef_x = std::sqrt(a) * (1.0 - abp) / (1.0 - ab);
        const double coef_0 = std::sqrt(abp) * (1.0 - a) / (1.0 - ab);
        const double vscale = (1.0 - a) * (1.0 - abp) / (1.0 - ab);

        Rng rng(mix_seed(seed, 0xD17ull));
        double worst = 0.0;
        for (int point = 0; point < 100; ++point) {
            const DiffusedSample ds = forward_marginal(x0c, t, schedule, model, rng);
            // Active coordinates: all real bins, imaginary bins with v > 0.
            std::vector<double> mu, var, x;
            for (int part = 0; part < 2; ++part)
                for (int k = 0; k < K; ++k) {
                    const double v =
                        part == 0 ? model.var_real[k] : model.var_imag[k];
                    if (v == 0.0) continue;
                    const double xt = part == 0 ? ds.state.real_part(k, 0)
                                                : ds.state.imag_part(k, 0);
                    const double o = part == 0 ? x0c.real_part(k, 0) : x0c.imag_part(k, 0);
                    mu.push_back(coef_x * xt + coef_0 * o);
                    var.push_back(vscale * v);
                }
            const int m = static_cast<int>(mu.size());
            for (int j = 0; j < m; ++j)
                x.push_back(mu[j] + std::sqrt(var[j]) * rng.normal());

            double factored = 0.0;
            for (int j = 0; j < m; ++j) factored += log_normal_pdf(x[j], mu[j], var[j]);

            Mat cov(m, m);
            for (int j = 0; j < m; ++j) cov(j, j) = var[j];
            const double joint = log_mvn_dense(x, mu, std::move(cov));
            worst = std::max(worst, std::abs(joint - factored));
        }
        rep.stats.push_back({"max |log q_joint - log q_r - log q_i|", worst, 1e-8});
    }
    rep.wall_seconds = watch.seconds();
    return rep;
}

} // namespace

VerificationReport check_conditional_factorization(int length, double sigma,
                                                   const NoiseSchedule& schedule, int t,
                                                   long n_draws, std::uint64_t seed,
                                                   double origin_scale) {
    return factorization_report("conditional-factorization", length, sigma, schedule, t, n_draws,
                                seed, false, origin_scale);
}

VerificationReport check_factorization_negative_control(int length, double sigma,
                                                        const NoiseSchedule& schedule, int t,
                                                        long n_draws, std::uint64_t seed) {
    return factorization_report("factorization-negative-control", length, sigma, schedule, t,
                                n_draws, seed, true, 1.0);
}

VerificationReport check_score_identity(int length, double sigma, const NoiseSchedule& schedule,
                                        int t, std::uint64_t seed) {
    Stopwatch watch;
    const SpectralNoiseModel model = build_noise_model(length, sigma);
    const int K = model.bins();
    const double ab = schedule.alpha_bar(t);

    Rng rng(mix_seed(seed, 0x5C0ull));
    double worst = 0.0;
    for (int point = 0; point < 100; ++point) {
        Mat er(K, 1), ei(K, 1);
        for (int k = 0; k < K; ++k) {
            er(k, 0) = rng.normal();
            ei(k, 0) = model.var_imag[k] > 0.0 ? rng.normal() : 0.0;
        }
        const SpectralState eps = make_compressed(er, ei, length);
        const SpectralState score = noise_to_score(eps, t, schedule, model);

        for (int part = 0; part < 2; ++part)
            for (int k = 0; k < K; ++k) {
                const double v = part == 0 ? model.var_real[k] : model.var_imag[k];
                if (v == 0.0) continue; // imaginary Nyquist: excluded (zero variance)
                const double e = part == 0 ? eps.real_part(k, 0) : eps.imag_part(k, 0);
                const double x = std::sqrt(1.0 - ab) * e; // x - mean, directly
                const double var = (1.0 - ab) * v;
                const double h = 1e-6;
                auto logpdf = [&](double z) { return -0.5 * z * z / var; };
                const double fd = (logpdf(x + h) - logpdf(x - h)) / (2.0 * h);
                const double an =
                    part == 0 ? score.real_part(k, 0) : score.imag_part(k, 0);
                const double rel = std::abs(fd - an) / std::max(1.0, std::abs(an));
                worst = std::max(worst, rel);
            }
    }

    VerificationReport rep;
    rep.name = "score-noise-identity";
    rep.params = format_params({{"L", double(length)}, {"sigma", sigma}, {"t", double(t)}}, seed);
    if (model.nyquist()) rep.params += " imag_nyquist=excluded(zero variance)";
    rep.stats.push_back({"max rel |score_fd - score|", worst, 1e-6});
    rep.wall_seconds = watch.seconds();
    return rep;
}

namespace {

VerificationReport loss_equivalence_report(const char* name, int length,
                                           const NoiseSchedule& schedule, int trials,
                                           std::uint64_t seed, bool omit_conversion) {
    Stopwatch watch;
    const SpectralNoiseModel model = build_noise_model(length, 1.0);
    const int K = model.bins();
    Rng rng(mix_seed(seed, 0x10E0ull));

    double worst = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        const int t = 1 + static_cast<int>(rng.uniform() * schedule.steps());
        auto random_pair = [&] {
            Mat r(K, 2), i(K, 2);
            for (double& v : r.a) v = rng.normal();
            for (double& v : i.a) v = rng.normal();
            if (model.nyquist())
                for (int d = 0; d < 2; ++d) i(K - 1, d) = 0.0;
            return make_compressed(std::move(r), std::move(i), length);
        };
        const SpectralState eps_true = random_pair();
        const SpectralState eps_hat = random_pair();

        const WeightingMode mode = omit_conversion ? WeightingMode::Simple : WeightingMode::Elbo;
        const LossReport disc = discrete_loss(eps_hat, eps_true, t, schedule, model, mode);
        const SpectralState score_hat = noise_to_score(eps_hat, t, schedule, model);
        const LossReport cont = continuous_loss(score_hat, eps_true, t, schedule, model, mode);
        const double rel =
            std::abs(disc.total - cont.total) / std::max({disc.total, cont.total, 1e-300});
        worst = std::max(worst, rel);
    }

    VerificationReport rep;
    rep.name = name;
    rep.params =
        format_params({{"L", double(length)}, {"trials", double(trials)}}, seed);
    rep.stats.push_back({"max rel |disc - cont|", worst, omit_conversion ? 1e-3 : 1e-10});
    rep.negative_control = omit_conversion;
    rep.wall_seconds = watch.seconds();
    return rep;
}

} // namespace

VerificationReport check_loss_equivalence(int length, const NoiseSchedule& schedule, int trials,
                                          std::uint64_t seed) {
    return loss_equivalence_report("loss-equivalence", length, schedule, trials, seed, false);
}

VerificationReport check_loss_equivalence_negative_control(int length,
                                                           const NoiseSchedule& schedule,
                                                           int trials, std::uint64_t seed) {
    return loss_equivalence_report("loss-equivalence-negative-control", length, schedule, trials,
                                   seed, true);
}

VerificationReport check_trig_orthogonality(int period, int k_max) {
    Stopwatch watch;
    double worst_cos = 0.0, worst_sin = 0.0;
    for (int k = 0; k <= k_max; ++k) {
        long double sc = 0.0L, ss = 0.0L;
        for (int tau = 1; tau <= period; ++tau) {
            const long double ang =
                2.0L * std::numbers::pi_v<long double> * k * tau / period;
            sc += std::cos(ang);
            ss += std::sin(ang);
        }
        const double expect = k % period == 0 ? static_cast<double>(period) : 0.0;
        worst_cos = std::max(worst_cos, std::abs(static_cast<double>(sc) - expect));
        worst_sin = std::max(worst_sin, std::abs(static_cast<double>(ss)));
    }
    VerificationReport rep;
    rep.name = "trig-orthogonality";
    rep.params = format_params({{"T", double(period)}, {"k_max", double(k_max)}}, 0);
    rep.stats.push_back({"max |S_cos - T delta|", worst_cos, 1e-9});
    rep.stats.push_back({"max |S_sin|", worst_sin, 1e-9});
    rep.wall_seconds = watch.seconds();
    return rep;
}

VerificationReport check_mft_marginal_entanglement(const NoiseSchedule& schedule, int t,
                                                   long n_draws, std::uint64_t seed) {
    Stopwatch watch;
    const int length = 8;
    const SpectralNoiseModel model = build_noise_model(length, 1.0);
    const int K = model.bins();
    const double ab = schedule.alpha_bar(t);
    const double a0 = std::sqrt(ab), a1 = std::sqrt(1.0 - ab);

    // Two atoms with perfectly correlated quadratures: (u, u) and (-u, -u).
    Rng urng(mix_seed(seed, 0xABCull));
    std::vector<double> u(K);
    for (int k = 0; k < K; ++k) u[k] = 0.5 + urng.uniform();
    if (model.nyquist()) u[K - 1] = 0.0; // imaginary Nyquist must stay empty

    // Diagonal cross-covariance over the mixture marginal, per bin; the
    // exact mixture moment is alpha_bar * u_k^2.
    std::vector<double> sum_r(K, 0.0), sum_i(K, 0.0), cross(K, 0.0), cross_ind(K, 0.0);
    std::vector<double> sum_r2(K, 0.0), sum_i2(K, 0.0);
    const long chunks = (n_draws + kChunk - 1) / kChunk;
    std::vector<std::vector<double>> partial(static_cast<size_t>(chunks));
#pragma omp parallel for schedule(dynamic)
    for (long c = 0; c < chunks; ++c) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(c)));
        std::vector<double> acc(6 * K, 0.0);
        const long lo = c * kChunk, hi = std::min(n_draws, lo + kChunk);
        for (long it = lo; it < hi; ++it) {
            const double sign = rng.uniform() < 0.5 ? 1.0 : -1.0;
            const double sign2 = rng.uniform() < 0.5 ? 1.0 : -1.0;
            const SpectralState e = compress_noise(sample_spectral_noise(model, 1, rng), model);
            for (int k = 0; k < K; ++k) {
                const double r = a0 * sign * u[k] + a1 * e.real_part(k, 0);
                const double i = a0 * sign * u[k] + a1 * e.imag_part(k, 0);
                // Independent-atoms twin: quadrature signs drawn separately.
                const double i_ind = a0 * sign2 * u[k] + a1 * e.imag_part(k, 0);
                acc[k] += r;
                acc[K + k] += i;
                acc[2 * K + k] += r * i;
                acc[3 * K + k] += r * i_ind;
                acc[4 * K + k] += r * r;
                acc[5 * K + k] += i * i;
            }
        }
        partial[static_cast<size_t>(c)] = std::move(acc);
    }
    for (const auto& acc : partial)
        for (int k = 0; k < K; ++k) {
            sum_r[k] += acc[k];
            sum_i[k] += acc[K + k];
            cross[k] += acc[2 * K + k];
            cross_ind[k] += acc[3 * K + k];
            sum_r2[k] += acc[4 * K + k];
            sum_i2[k] += acc[5 * K + k];
        }

    double dev_vs_exact = 0.0, max_ind = 0.0, max_gap = 0.0;
    for (int k = 0; k < K; ++k) {
        const double mr = sum_r[k] / n_draws, mi = sum_i[k] / n_draws;
        const double c_emp = cross[k] / n_draws - mr * mi;
        const double c_ind = cross_ind[k] / n_draws - mr * mi;
        const double exact = ab * u[k] * u[k];
        dev_vs_exact = std::max(dev_vs_exact, std::abs(c_emp - exact));
        max_ind = std::max(max_ind, std::abs(c_ind));
        max_gap = std::max(max_gap, std::abs(c_emp));
    }
    const double se = 5.0 / std::sqrt(static_cast<double>(n_draws));

    VerificationReport rep;
    rep.name = "mft-marginal-entanglement";
    rep.params = format_params(
        {{"L", double(length)}, {"t", double(t)}, {"alpha_bar", ab}, {"N", double(n_draws)}},
        seed);
    rep.informational = true; // quantifies the MFT gap; not a pass/fail claim
    rep.stats.push_back({"max |crosscov - alpha_bar u^2| (coupled atoms)", dev_vs_exact, 3.0 * se});
    rep.stats.push_back({"max |crosscov| (independent atoms)", max_ind, 3.0 * se});
    rep.stats.push_back({"measured MFT gap (max crosscov)", max_gap, max_gap});
    rep.wall_seconds = watch.seconds();
    return rep;
}

VerificationReport check_sde_marginal_preservation(int length, double sigma,
                                                   const NoiseSchedule& schedule, int em_steps,
                                                   int paths, SdeScoreFactor factor,
                                                   double rel_tol, std::uint64_t seed) {
    Stopwatch watch;
    const SpectralNoiseModel model = build_noise_model(length, sigma);
    const int K = model.bins();
    const int T = schedule.steps();

    // Per-bin data variances: fixed, assorted, imaginary Nyquist empty.
    std::vector<double> v0_r(K), v0_i(K);
    for (int k = 0; k < K; ++k) {
        v0_r[k] = 0.5 + 1.25 * ((k * 3 + 1) % 4);
        v0_i[k] = 0.75 + 0.5 * ((k * 5 + 2) % 3);
    }
    if (model.nyquist()) v0_i[K - 1] = 0.0;

    auto marginal_var = [&](int t, int k, bool real_part) {
        const double ab = schedule.alpha_bar(t);
        const double v0 = real_part ? v0_r[k] : v0_i[k];
        const double v = real_part ? model.var_real[k] : model.var_imag[k];
        return ab * v0 + (1.0 - ab) * v;
    };
    ScoreFn analytic = [&](const Mat& R, const Mat& I, double, int t, Mat& sr, Mat& si) {
        for (int k = 0; k < K; ++k) {
            const double mr = marginal_var(t, k, true);
            const double mi = marginal_var(t, k, false);
            sr(k, 0) = -R(k, 0) / mr;
            si(k, 0) = mi > 0.0 ? -I(k, 0) / mi : 0.0;
        }
    };

    SamplerConfig sc;
    sc.sde_steps = em_steps;
    sc.sde_score_factor = factor;
    sc.final_denoise = false; // the marginal claim concerns the raw EM chain

    constexpr int kPathChunk = 64;
    const int chunks = (paths + kPathChunk - 1) / kPathChunk;
    std::vector<std::vector<double>> partial(static_cast<size_t>(chunks));
#pragma omp parallel for schedule(dynamic)
    for (int c = 0; c < chunks; ++c) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(c)));
        std::vector<double> acc(4 * K, 0.0);
        const int lo = c * kPathChunk, hi = std::min(paths, lo + kPathChunk);
        for (int it = lo; it < hi; ++it) {
            Mat r(K, 1), i(K, 1);
            for (int k = 0; k < K; ++k) {
                r(k, 0) = std::sqrt(marginal_var(T, k, true)) * rng.normal();
                const double mi = marginal_var(T, k, false);
                i(k, 0) = mi > 0.0 ? std::sqrt(mi) * rng.normal() : 0.0;
            }
            const SpectralState fin = sde_integrate(
                make_compressed(std::move(r), std::move(i), length), analytic, schedule, model,
                sc, rng);
            for (int k = 0; k < K; ++k) {
                acc[k] += fin.real_part(k, 0);
                acc[K + k] += fin.real_part(k, 0) * fin.real_part(k, 0);
                acc[2 * K + k] += fin.imag_part(k, 0);
                acc[3 * K + k] += fin.imag_part(k, 0) * fin.imag_part(k, 0);
            }
        }
        partial[static_cast<size_t>(c)] = std::move(acc);
    }
    std::vector<double> acc(4 * K, 0.0);
    for (const auto& p : partial)
        for (size_t j = 0; j < acc.size(); ++j) acc[j] += p[j];

    double worst = 0.0;
    for (int k = 0; k < K; ++k) {
        const double mr = acc[k] / paths;
        const double vr = acc[K + k] / paths - mr * mr;
        worst = std::max(worst, std::abs(vr - v0_r[k]) / v0_r[k]);
        if (v0_i[k] > 0.0) {
            const double mi = acc[2 * K + k] / paths;
            const double vi = acc[3 * K + k] / paths - mi * mi;
            worst = std::max(worst, std::abs(vi - v0_i[k]) / v0_i[k]);
        }
    }

    VerificationReport rep;
    rep.name = factor == SdeScoreFactor::One ? "sde-marginal-factor-one"
                                             : "sde-marginal-factor-half";
    rep.params = format_params({{"L", double(length)},
                                {"sigma", sigma},
                                {"em_steps", double(em_steps)},
                                {"paths", double(paths)}},
                               seed);
    rep.stats.push_back({"max rel |terminal var - data var|", worst, rel_tol});
    rep.wall_seconds = watch.seconds();
    return rep;
}

std::string report_rows_tsv(const VerificationReport& report) {
    std::ostringstream oss;
    for (const auto& s : report.stats) {
        const char* verdict = report.informational ? "informational"
                              : report.negative_control
                                  ? (s.within() ? "UNEXPECTED-PASS" : "fails-as-designed")
                                  : (s.within() ? "pass" : "FAIL");
        oss << report.name << "\t" << report.params << "\t" << s.label << "\t" << s.deviation
            << "\t" << s.tolerance << "\t" << verdict << "\t" << report.wall_seconds << "\n";
    }
    return oss.str();
}

std::vector<VerificationReport> run_verification_suite(const SuiteOptions& options) {
    std::vector<VerificationReport> reports;
    const NoiseSchedule schedule = NoiseSchedule::build(ScheduleKind::Linear, 1000, 1e-4, 2e-2);
    const std::uint64_t seed = options.seed;
    const long n = options.n_draws;

    int salt = 1;
    auto next_seed = [&] { return mix_seed(seed, static_cast<std::uint64_t>(salt++)); };

    for (int length : {4, 5, 8, 9, 16, 24}) {
        reports.push_back(check_orthogonality(length, 1.0, n, next_seed()));
        reports.push_back(check_covariance_structure(length, 1.0, n, next_seed()));
    }
    reports.push_back(check_covariance_negative_control(8, 1.0, n, next_seed()));
    for (double alpha : {0.25, 0.5, 0.9})
        reports.push_back(check_additivity(8, 1.0, alpha, n, next_seed()));
    for (int length : {8, 9}) {
        reports.push_back(
            check_conditional_factorization(length, 1.0, schedule, 500, n, next_seed()));
        reports.push_back(check_score_identity(length, 1.0, schedule, 600, next_seed()));
        reports.push_back(check_loss_equivalence(length, schedule, 1000, next_seed()));
    }
    reports.push_back(
        check_factorization_negative_control(8, 1.0, schedule, 500, n, next_seed()));
    reports.push_back(check_loss_equivalence_negative_control(8, schedule, 100, next_seed()));
    reports.push_back(check_trig_orthogonality(16, 33));
    reports.push_back(check_trig_orthogonality(7, 22));
    reports.push_back(check_mft_marginal_entanglement(schedule, 100, n, next_seed()));

    if (options.include_sde_arbiter) {
        reports.push_back(check_sde_marginal_preservation(8, 1.0, schedule, 1000, 10000,
                                                          SdeScoreFactor::One, 0.05,
                                                          next_seed()));
        // The literal half-factor reading, recorded for the report.
        VerificationReport half = check_sde_marginal_preservation(
            8, 1.0, schedule, 1000, 10000, SdeScoreFactor::Half, 0.05, next_seed());
        half.informational = true;
        half.params += " note=literal-half-reading-recorded";
        reports.push_back(std::move(half));
    }
    return reports;
}

bool suite_healthy(const std::vector<VerificationReport>& reports) {
    for (const auto& r : reports) {
        if (r.informational) continue;
        if (!r.ok()) return false;
    }
    return true;
}

} // namespace pacodi
