#pragma once

#include "pacodi/types.hpp"

namespace pacodi {

// Unitary discrete Fourier analysis/synthesis of real multichannel series,
// plus lossless Hermitian compression to the K = floor(L/2) positive bins.
//
// Convention: X_k = (1/sqrt(L)) * sum_n x_n exp(-j 2 pi k n / L), applied
// channel-wise along the time axis. The 1/sqrt(L) normalization makes the
// operator an isometry, so Parseval holds exactly and the inverse uses the
// same scale factor.

struct CompressOptions {
    // DC magnitude and Hermitian asymmetry tolerances, relative to the
    // Frobenius norm of the spectrum.
    double dc_tol = 1e-8;
    double symmetry_tol = 1e-8;
};

// Forward transform. Power-of-two lengths take a radix-2 FFT; other lengths
// use a cached-table direct transform. Throws InvalidInputError for L < 2.
SpectralState dft(const TemporalSeries& series);

// Inverse transform of a Full-form spectrum. The imaginary residue of the
// synthesis (zero for Hermitian spectra up to round-off) is written to
// *imag_residue when provided, as a max-abs diagnostic.
// Throws FormError on compressed input.
TemporalSeries idft(const SpectralState& spectrum, double* imag_residue = nullptr);

// Keep bins 1..K, discarding DC and the redundant negative frequencies.
// Preconditions (NormalizationError / SymmetryError): DC below tolerance,
// Hermitian symmetry within tolerance. The imaginary Nyquist entry of the
// result is exactly zero for even L.
SpectralState compress(const SpectralState& full, const CompressOptions& opts = {});

// Rebuild the Full form: DC bin zero, negative frequencies mirrored as
// conjugates, imaginary Nyquist forced to zero. compress(decompress(s)) == s
// exactly on stored fields.
SpectralState decompress(const SpectralState& comp);

// Frobenius norm over both quadrature matrices.
double spectral_norm(const SpectralState& s);

// max_k |X_k - conj(X_{L-k})| over bins 1..L-1 and channels (Full form).
double hermitian_asymmetry(const SpectralState& full);

namespace reference {
// Direct O(L^2) summation, serial. Kept as the independent oracle the
// optimized transform is tested against.
SpectralState dft_direct(const TemporalSeries& series);
} // namespace reference

} // namespace pacodi
