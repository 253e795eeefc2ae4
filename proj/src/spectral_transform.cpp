#include "pacodi/spectral_transform.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace pacodi {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_pow2(int n) { return n >= 2 && (n & (n - 1)) == 0; }

// cos/sin tables for the direct transform, cached per length.
struct TrigTable {
    int length;
    std::vector<double> cos_t; // [k*L + n] = cos(2 pi k n / L)
    std::vector<double> sin_t;
};

std::shared_ptr<const TrigTable> trig_table(int L) {
    static std::mutex mu;
    static std::map<int, std::shared_ptr<const TrigTable>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(L);
    if (it != cache.end()) return it->second;
    auto t = std::make_shared<TrigTable>();
    t->length = L;
    t->cos_t.resize(static_cast<size_t>(L) * L);
    t->sin_t.resize(static_cast<size_t>(L) * L);
    for (int k = 0; k < L; ++k) {
        for (int n = 0; n < L; ++n) {
            // Reduce k*n mod L first so the angle stays small and accurate.
            const long kn = (static_cast<long>(k) * n) % L;
            const double ang = kTwoPi * static_cast<double>(kn) / L;
            t->cos_t[static_cast<size_t>(k) * L + n] = std::cos(ang);
            t->sin_t[static_cast<size_t>(k) * L + n] = std::sin(ang);
        }
    }
    cache[L] = t;
    return t;
}

// In-place iterative radix-2 FFT on interleaved (re, im) pairs.
// sign = -1: forward kernel exp(-j...), sign = +1: inverse kernel.
void fft_radix2(std::vector<double>& re, std::vector<double>& im, int n, int sign) {
    // Bit-reversal permutation.
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) {
            std::swap(re[i], re[j]);
            std::swap(im[i], im[j]);
        }
    }
    for (int len = 2; len <= n; len <<= 1) {
        const double ang = sign * kTwoPi / len;
        const int half = len / 2;
        for (int i = 0; i < n; i += len) {
            for (int k = 0; k < half; ++k) {
                const double wr = std::cos(ang * k);
                const double wi = std::sin(ang * k);
                const int u = i + k, v = i + k + half;
                const double tr = re[v] * wr - im[v] * wi;
                const double ti = re[v] * wi + im[v] * wr;
                re[v] = re[u] - tr;
                im[v] = im[u] - ti;
                re[u] += tr;
                im[u] += ti;
            }
        }
    }
}

} // namespace

SpectralState dft(const TemporalSeries& series) {
    const int L = series.length();
    const int D = series.channels();
    if (L < 2) throw InvalidInputError("dft: series length must be >= 2");

    Mat R(L, D), I(L, D);
    const double scale = 1.0 / std::sqrt(static_cast<double>(L));

    if (is_pow2(L)) {
        for (int d = 0; d < D; ++d) {
            std::vector<double> re(L), im(L, 0.0);
            for (int n = 0; n < L; ++n) re[n] = series.values(n, d);
            fft_radix2(re, im, L, -1);
            for (int k = 0; k < L; ++k) {
                R(k, d) = re[k] * scale;
                I(k, d) = im[k] * scale;
            }
        }
    } else {
        auto t = trig_table(L);
        for (int d = 0; d < D; ++d) {
            for (int k = 0; k < L; ++k) {
                const double* ct = &t->cos_t[static_cast<size_t>(k) * L];
                const double* st = &t->sin_t[static_cast<size_t>(k) * L];
                double sr = 0.0, si = 0.0;
                for (int n = 0; n < L; ++n) {
                    const double x = series.values(n, d);
                    sr += x * ct[n];
                    si -= x * st[n];
                }
                R(k, d) = sr * scale;
                I(k, d) = si * scale;
            }
        }
    }
    return SpectralState(std::move(R), std::move(I), SpectralForm::Full, L);
}

TemporalSeries idft(const SpectralState& spectrum, double* imag_residue) {
    if (spectrum.form != SpectralForm::Full)
        throw FormError("idft: expected Full-form spectrum");
    const int L = spectrum.bins();
    const int D = spectrum.channels();
    const double scale = 1.0 / std::sqrt(static_cast<double>(L));

    TemporalSeries out(L, D);
    double residue = 0.0;

    if (is_pow2(L)) {
        for (int d = 0; d < D; ++d) {
            std::vector<double> re(L), im(L);
            for (int k = 0; k < L; ++k) {
                re[k] = spectrum.real_part(k, d);
                im[k] = spectrum.imag_part(k, d);
            }
            fft_radix2(re, im, L, +1);
            for (int n = 0; n < L; ++n) {
                out.values(n, d) = re[n] * scale;
                residue = std::max(residue, std::abs(im[n] * scale));
            }
        }
    } else {
        auto t = trig_table(L);
        for (int d = 0; d < D; ++d) {
            for (int n = 0; n < L; ++n) {
                const double* ct = &t->cos_t[static_cast<size_t>(n) * L];
                const double* st = &t->sin_t[static_cast<size_t>(n) * L];
                double xr = 0.0, xi = 0.0;
                for (int k = 0; k < L; ++k) {
                    const double r = spectrum.real_part(k, d);
                    const double i = spectrum.imag_part(k, d);
                    // exp(+j 2 pi k n / L); table indexed [n*L + k] == [k*L + n].
                    xr += r * ct[k] - i * st[k];
                    xi += r * st[k] + i * ct[k];
                }
                out.values(n, d) = xr * scale;
                residue = std::max(residue, std::abs(xi * scale));
            }
        }
    }
    if (imag_residue) *imag_residue = residue;
    return out;
}

double spectral_norm(const SpectralState& s) {
    double acc = 0.0;
    for (double v : s.real_part.a) acc += v * v;
    for (double v : s.imag_part.a) acc += v * v;
    return std::sqrt(acc);
}

double hermitian_asymmetry(const SpectralState& full) {
    if (full.form != SpectralForm::Full)
        throw FormError("hermitian_asymmetry: expected Full form");
    const int L = full.bins();
    const int D = full.channels();
    double worst = 0.0;
    for (int k = 1; k < L; ++k) {
        const int m = L - k;
        for (int d = 0; d < D; ++d) {
            const double dr = full.real_part(k, d) - full.real_part(m, d);
            const double di = full.imag_part(k, d) + full.imag_part(m, d);
            worst = std::max(worst, std::sqrt(dr * dr + di * di));
        }
    }
    return worst;
}

SpectralState compress(const SpectralState& full, const CompressOptions& opts) {
    if (full.form != SpectralForm::Full)
        throw FormError("compress: expected Full-form spectrum");
    const int L = full.bins();
    const int D = full.channels();
    const int K = compressed_bins(L);
    const double norm = spectral_norm(full);

    double dc = 0.0;
    for (int d = 0; d < D; ++d) {
        const double r = full.real_part(0, d);
        const double i = full.imag_part(0, d);
        dc = std::max(dc, std::sqrt(r * r + i * i));
    }
    if (dc > opts.dc_tol * std::max(norm, 1e-300))
        throw NormalizationError("compress: DC bin above tolerance; center the series first");
    if (hermitian_asymmetry(full) > opts.symmetry_tol * std::max(norm, 1e-300))
        throw SymmetryError("compress: spectrum violates Hermitian symmetry");

    Mat R(K, D), I(K, D);
    for (int k = 1; k <= K; ++k)
        for (int d = 0; d < D; ++d) {
            R(k - 1, d) = full.real_part(k, d);
            I(k - 1, d) = full.imag_part(k, d);
        }
    if (has_nyquist(L))
        for (int d = 0; d < D; ++d) I(K - 1, d) = 0.0;
    return SpectralState(std::move(R), std::move(I), SpectralForm::Compressed, L);
}

SpectralState decompress(const SpectralState& comp) {
    if (comp.form != SpectralForm::Compressed)
        throw FormError("decompress: expected Compressed-form spectrum");
    const int L = comp.source_length;
    const int K = compressed_bins(L);
    const int D = comp.channels();
    if (comp.bins() != K) throw FormError("decompress: bin count inconsistent with source length");

    Mat R(L, D), I(L, D);
    for (int k = 1; k <= K; ++k)
        for (int d = 0; d < D; ++d) {
            R(k, d) = comp.real_part(k - 1, d);
            I(k, d) = comp.imag_part(k - 1, d);
        }
    if (has_nyquist(L))
        for (int d = 0; d < D; ++d) I(K, d) = 0.0;
    // Mirror conjugates onto the negative frequencies.
    for (int k = 1; k <= (L - 1) / 2; ++k)
        for (int d = 0; d < D; ++d) {
            R(L - k, d) = comp.real_part(k - 1, d);
            I(L - k, d) = -comp.imag_part(k - 1, d);
        }
    return SpectralState(std::move(R), std::move(I), SpectralForm::Full, L);
}

namespace reference {

SpectralState dft_direct(const TemporalSeries& series) {
    const int L = series.length();
    const int D = series.channels();
    if (L < 2) throw InvalidInputError("dft_direct: series length must be >= 2");
    Mat R(L, D), I(L, D);
    const double scale = 1.0 / std::sqrt(static_cast<double>(L));
    for (int d = 0; d < D; ++d)
        for (int k = 0; k < L; ++k) {
            double sr = 0.0, si = 0.0;
            for (int n = 0; n < L; ++n) {
                const double ang = kTwoPi * static_cast<double>((static_cast<long>(k) * n) % L) / L;
                sr += series.values(n, d) * std::cos(ang);
                si -= series.values(n, d) * std::sin(ang);
            }
            R(k, d) = sr * scale;
            I(k, d) = si * scale;
        }
    return SpectralState(std::move(R), std::move(I), SpectralForm::Full, L);
}

} // namespace reference

} // namespace pacodi
