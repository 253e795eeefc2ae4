#include "pacodi/spectral_noise.hpp"

#include "pacodi/spectral_transform.hpp"

#include <cmath>

namespace pacodi {

SpectralNoiseModel build_noise_model(int length, double sigma) {
    if (length < 2) throw InvalidInputError("build_noise_model: length must be >= 2");
    if (!(sigma > 0.0)) throw InvalidInputError("build_noise_model: sigma must be positive");

    SpectralNoiseModel m;
    m.sigma = sigma;
    m.length = length;
    const double s2 = sigma * sigma;
    const int L = length;
    const int ny = L / 2; // Nyquist index, meaningful only for even L

    m.cov_real = Mat(L, L);
    m.cov_imag = Mat(L, L);
    for (int k = 0; k < L; ++k) {
        for (int l = 0; l < L; ++l) {
            const bool self_conjugate = (k == l) && (k == 0 || (L % 2 == 0 && k == ny));
            if (self_conjugate) {
                m.cov_real(k, l) = s2;
                m.cov_imag(k, l) = 0.0;
            } else if (k == l) {
                m.cov_real(k, l) = 0.5 * s2;
                m.cov_imag(k, l) = 0.5 * s2;
            } else if (k + l == L) {
                m.cov_real(k, l) = 0.5 * s2;
                m.cov_imag(k, l) = -0.5 * s2;
            }
        }
    }

    const int K = m.bins();
    m.var_real.resize(K);
    m.var_imag.resize(K);
    m.weight_real.resize(K);
    m.weight_imag.resize(K);
    for (int k = 1; k <= K; ++k) {
        const bool is_ny = (L % 2 == 0 && k == ny);
        m.var_real[k - 1] = 0.5 * s2 * (is_ny ? 2.0 : 1.0);
        m.var_imag[k - 1] = 0.5 * s2 * (is_ny ? 0.0 : 1.0);
        m.weight_real[k - 1] = 1.0 / m.var_real[k - 1];
        m.weight_imag[k - 1] = m.var_imag[k - 1] > 0.0 ? 1.0 / m.var_imag[k - 1] : 0.0;
    }
    return m;
}

TemporalSeries sample_temporal_noise(int length, int channels, double sigma, Rng& rng) {
    TemporalSeries out(length, channels);
    for (int n = 0; n < length; ++n)
        for (int d = 0; d < channels; ++d) out.values(n, d) = sigma * rng.normal();
    return out;
}

SpectralState sample_spectral_noise(const SpectralNoiseModel& model, int channels, Rng& rng) {
    return dft(sample_temporal_noise(model.length, channels, model.sigma, rng));
}

SpectralState compress_noise(const SpectralState& full, const SpectralNoiseModel& model) {
    if (full.form != SpectralForm::Full)
        throw FormError("compress_noise: expected Full-form spectrum");
    if (full.bins() != model.length)
        throw FormError("compress_noise: spectrum length does not match model");
    const double norm = spectral_norm(full);
    if (hermitian_asymmetry(full) > 1e-8 * std::max(norm, 1e-300))
        throw SymmetryError("compress_noise: spectrum violates Hermitian symmetry");

    const int L = model.length;
    const int K = model.bins();
    const int D = full.channels();
    Mat R(K, D), I(K, D);
    for (int k = 1; k <= K; ++k)
        for (int d = 0; d < D; ++d) {
            R(k - 1, d) = full.real_part(k, d);
            I(k - 1, d) = full.imag_part(k, d);
        }
    if (model.nyquist())
        for (int d = 0; d < D; ++d) I(K - 1, d) = 0.0;
    return SpectralState(std::move(R), std::move(I), SpectralForm::Compressed, L);
}

std::pair<double, double> mahalanobis_sq(const SpectralState& residual,
                                         const SpectralNoiseModel& model) {
    if (residual.form != SpectralForm::Compressed)
        throw FormError("mahalanobis_sq: expected Compressed-form residual");
    const int K = residual.bins();
    if (K != model.bins())
        throw FormError("mahalanobis_sq: residual bins do not match model");
    const int D = residual.channels();
    double qr = 0.0, qi = 0.0;
    for (int k = 0; k < K; ++k)
        for (int d = 0; d < D; ++d) {
            const double r = residual.real_part(k, d);
            const double i = residual.imag_part(k, d);
            qr += model.weight_real[k] * r * r;
            qi += model.weight_imag[k] * i * i;
        }
    return {qr, qi};
}

} // namespace pacodi
