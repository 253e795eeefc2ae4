#pragma once

#include "pacodi/rng.hpp"
#include "pacodi/types.hpp"

#include <utility>
#include <vector>

namespace pacodi {

// Hermitian complex Gaussian noise model: the spectrum of i.i.d. temporal
// Gaussian noise. The quadrature covariances are sparse "X-shape" matrices
// (diagonal plus anti-diagonal k+l=L):
//
//   cov(eps_r[k], eps_r[l]) = sigma^2        k=l=0 or k=l=L/2
//                             sigma^2/2      k=l, or k+l=L
//                             0              otherwise
//   cov(eps_i[k], eps_i[l]) = 0              k=l=0 or k=l=L/2
//                             sigma^2/2      k=l
//                            -sigma^2/2      k+l=L
//                             0              otherwise
//
// On the compressed manifold (bins 1..K) the marginals are diagonal with
//   var_real[k] = sigma^2/2 * (1 + delta_{k,L/2})
//   var_imag[k] = sigma^2/2 * (1 - delta_{k,L/2})
// so the only zero-variance coordinate is the imaginary Nyquist entry.
struct SpectralNoiseModel {
    double sigma = 1.0;
    int length = 0;       // L
    Mat cov_real;         // L x L
    Mat cov_imag;         // L x L
    std::vector<double> var_real;    // K entries, bins 1..K
    std::vector<double> var_imag;    // K entries
    std::vector<double> weight_real; // 1/var, K entries
    std::vector<double> weight_imag; // 1/var where var > 0, else 0

    int bins() const { return compressed_bins(length); }
    bool nyquist() const { return has_nyquist(length); }
};

SpectralNoiseModel build_noise_model(int length, double sigma);

// i.i.d. N(0, sigma^2) entries, L x D.
TemporalSeries sample_temporal_noise(int length, int channels, double sigma, Rng& rng);

// Spectral noise is always realized as the DFT of temporal noise, never by
// sampling the covariance directly; this guarantees exact Hermitian symmetry.
SpectralState sample_spectral_noise(const SpectralNoiseModel& model, int channels, Rng& rng);

// Keep bins 1..K of a Hermitian-symmetric Full spectrum. Unlike compress(),
// no DC precondition: noise has mass at DC and it is discarded here.
// Throws SymmetryError if the input is not Hermitian within tolerance.
SpectralState compress_noise(const SpectralState& full, const SpectralNoiseModel& model);

// Squared Mahalanobis norms of a compressed residual under the diagonal
// compressed precision, summed over channels: (sum w_r r^2, sum w_i i^2).
// The zero-variance imaginary Nyquist coordinate contributes 0 by its weight.
std::pair<double, double> mahalanobis_sq(const SpectralState& residual,
                                         const SpectralNoiseModel& model);

} // namespace pacodi
