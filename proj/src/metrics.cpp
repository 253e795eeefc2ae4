#include "pacodi/metrics.hpp"

#include "pacodi/spectral_transform.hpp"

#include <algorithm>
#include <cmath>

namespace pacodi {

namespace {

constexpr double kStdFloor = 1e-8;

void require_same_channels(const std::vector<TemporalSeries>& a,
                           const std::vector<TemporalSeries>& b, const char* who) {
    if (a.empty() || b.empty()) throw InvalidInputError(std::string(who) + ": empty dataset");
    if (a.front().channels() != b.front().channels())
        throw InvalidInputError(std::string(who) + ": channel counts differ");
}

// D x D Pearson correlation with time flattened across all samples.
Mat channel_correlation(const std::vector<TemporalSeries>& samples, bool* warned) {
    const int d = samples.front().channels();
    long count = 0;
    std::vector<double> mean(d, 0.0);
    for (const auto& s : samples) {
        for (int t = 0; t < s.length(); ++t)
            for (int c = 0; c < d; ++c) mean[c] += s.values(t, c);
        count += s.length();
    }
    for (auto& m : mean) m /= static_cast<double>(count);

    Mat cov(d, d);
    for (const auto& s : samples)
        for (int t = 0; t < s.length(); ++t)
            for (int i = 0; i < d; ++i) {
                const double vi = s.values(t, i) - mean[i];
                for (int j = i; j < d; ++j)
                    cov(i, j) += vi * (s.values(t, j) - mean[j]);
            }
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            cov(i, j) /= static_cast<double>(count);
            cov(j, i) = cov(i, j);
        }

    Mat corr(d, d);
    for (int i = 0; i < d; ++i) {
        double si = std::sqrt(cov(i, i));
        if (si < kStdFloor) {
            si = kStdFloor;
            if (warned) *warned = true;
        }
        for (int j = 0; j < d; ++j) {
            double sj = std::sqrt(cov(j, j));
            if (sj < kStdFloor) sj = kStdFloor;
            corr(i, j) = cov(i, j) / (si * sj);
        }
    }
    return corr;
}

} // namespace

double correlational_score(const std::vector<TemporalSeries>& real,
                           const std::vector<TemporalSeries>& synth, bool* warned) {
    require_same_channels(real, synth, "correlational_score");
    if (warned) *warned = false;
    const Mat cr = channel_correlation(real, warned);
    const Mat cs = channel_correlation(synth, warned);
    double acc = 0.0;
    for (size_t i = 0; i < cr.a.size(); ++i) {
        const double diff = cr.a[i] - cs.a[i];
        acc += diff * diff;
    }
    return std::sqrt(acc) / cr.rows;
}

namespace {

// Mean squared spectrum magnitude per bin, averaged over samples; one row
// per bin, one column per channel.
Mat mean_power(const std::vector<TemporalSeries>& samples) {
    const int length = samples.front().length();
    const int d = samples.front().channels();
    Mat power(length, d);
    for (const auto& s : samples) {
        if (s.length() != length)
            throw InvalidInputError("spectral_density_distance: sample lengths differ");
        const SpectralState spec = dft(s);
        for (int k = 0; k < length; ++k)
            for (int c = 0; c < d; ++c)
                power(k, c) += (spec.real_part(k, c) * spec.real_part(k, c) +
                                spec.imag_part(k, c) * spec.imag_part(k, c)) /
                               static_cast<double>(samples.size());
    }
    return power;
}

} // namespace

double spectral_density_distance(const std::vector<TemporalSeries>& real,
                                 const std::vector<TemporalSeries>& synth) {
    require_same_channels(real, synth, "spectral_density_distance");
    if (real.front().length() != synth.front().length())
        throw InvalidInputError("spectral_density_distance: lengths differ");
    const Mat pr = mean_power(real);
    const Mat ps = mean_power(synth);
    const int d = pr.cols;
    double acc = 0.0;
    for (int c = 0; c < d; ++c)
        for (int k = 0; k < pr.rows; ++k) acc += std::abs(pr(k, c) - ps(k, c));
    return acc / d;
}

std::vector<double> marginal_wasserstein1(const std::vector<TemporalSeries>& real,
                                          const std::vector<TemporalSeries>& synth,
                                          int quantiles) {
    require_same_channels(real, synth, "marginal_wasserstein1");
    const int d = real.front().channels();
    std::vector<double> out(d, 0.0);
    for (int c = 0; c < d; ++c) {
        std::vector<double> a, b;
        for (const auto& s : real)
            for (int t = 0; t < s.length(); ++t) a.push_back(s.values(t, c));
        for (const auto& s : synth)
            for (int t = 0; t < s.length(); ++t) b.push_back(s.values(t, c));
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        double acc = 0.0;
        for (int q = 0; q < quantiles; ++q) {
            const double u = (q + 0.5) / quantiles;
            const double qa = a[static_cast<size_t>(u * a.size())];
            const double qb = b[static_cast<size_t>(u * b.size())];
            acc += std::abs(qa - qb);
        }
        out[c] = acc / quantiles;
    }
    return out;
}

MetricsReport compute_metrics(const std::vector<TemporalSeries>& real,
                              const std::vector<TemporalSeries>& synth) {
    MetricsReport rep;
    rep.correlational_score = correlational_score(real, synth);
    rep.spectral_density_distance = spectral_density_distance(real, synth);
    rep.marginal_wasserstein1 = marginal_wasserstein1(real, synth);
    return rep;
}

int dominant_bin(const TemporalSeries& series) {
    const SpectralState spec = dft(series);
    const int K = compressed_bins(series.length());
    int best = 1;
    double best_power = -1.0;
    for (int k = 1; k <= K; ++k) {
        double p = 0.0;
        for (int d = 0; d < series.channels(); ++d)
            p += spec.real_part(k, d) * spec.real_part(k, d) +
                 spec.imag_part(k, d) * spec.imag_part(k, d);
        if (p > best_power) {
            best_power = p;
            best = k;
        }
    }
    return best;
}

} // namespace pacodi
