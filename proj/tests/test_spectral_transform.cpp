#include <doctest.h>

#include "pacodi/rng.hpp"
#include "pacodi/spectral_transform.hpp"

#include <cmath>

using namespace pacodi;

namespace {

TemporalSeries random_series(int length, int channels, Rng& rng, bool zero_mean = false) {
    TemporalSeries s(length, channels);
    for (int n = 0; n < length; ++n)
        for (int d = 0; d < channels; ++d) s.values(n, d) = rng.normal();
    if (zero_mean) {
        for (int d = 0; d < channels; ++d) {
            double mean = 0.0;
            for (int n = 0; n < length; ++n) mean += s.values(n, d);
            mean /= length;
            for (int n = 0; n < length; ++n) s.values(n, d) -= mean;
        }
    }
    return s;
}

double sq_norm(const Mat& m) {
    double acc = 0.0;
    for (double v : m.a) acc += v * v;
    return acc;
}

} // namespace

TEST_CASE("dft maps a constant signal entirely to DC") {
    TemporalSeries x(4, 1);
    for (int n = 0; n < 4; ++n) x.values(n, 0) = 1.0;
    const SpectralState s = dft(x);
    CHECK(s.real_part(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
    for (int k = 1; k < 4; ++k) {
        CHECK(std::abs(s.real_part(k, 0)) < 1e-14);
        CHECK(std::abs(s.imag_part(k, 0)) < 1e-14);
    }
    for (int k = 0; k < 4; ++k) CHECK(std::abs(s.imag_part(k, 0)) < 1e-14);
}

TEST_CASE("dft of the 2-point alternating signal") {
    // Direct evaluation of the 2-point sum: X_1 = (1 - (-1)*e^{-j pi}) / sqrt(2) = sqrt(2).
    TemporalSeries x(2, 1);
    x.values(0, 0) = 1.0;
    x.values(1, 0) = -1.0;
    const SpectralState s = dft(x);
    CHECK(std::abs(s.real_part(0, 0)) < 1e-14);
    CHECK(s.real_part(1, 0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(std::abs(s.imag_part(0, 0)) < 1e-14);
    CHECK(std::abs(s.imag_part(1, 0)) < 1e-14);
}

TEST_CASE("dft rejects length < 2") {
    TemporalSeries x(1, 1);
    CHECK_THROWS_AS(dft(x), InvalidInputError);
}

TEST_CASE("Parseval holds for random series across lengths") {
    Rng rng(11);
    for (int L : {4, 5, 8, 9, 24, 64, 96, 128, 255, 256, 1000, 1024}) {
        const TemporalSeries x = random_series(L, 3, rng);
        const SpectralState s = dft(x);
        const double nx = sq_norm(x.values);
        const double ns = sq_norm(s.real_part) + sq_norm(s.imag_part);
        CHECK(std::abs(nx - ns) < 1e-9 * nx);
    }
}

TEST_CASE("idft(dft(x)) recovers x within 1e-10 relative") {
    Rng rng(12);
    for (int L : {4, 5, 24, 64, 97, 256, 1024}) {
        const TemporalSeries x = random_series(L, 2, rng);
        double residue = -1.0;
        const TemporalSeries y = idft(dft(x), &residue);
        double worst = 0.0, scale = 0.0;
        for (size_t i = 0; i < x.values.a.size(); ++i) {
            worst = std::max(worst, std::abs(x.values.a[i] - y.values.a[i]));
            scale = std::max(scale, std::abs(x.values.a[i]));
        }
        CHECK(worst < 1e-10 * std::max(scale, 1.0));
        CHECK(residue < 1e-10 * std::max(scale, 1.0));
    }
}

TEST_CASE("idft inverts the constant spectrum") {
    Mat r(4, 1), i(4, 1);
    r(0, 0) = 2.0;
    const TemporalSeries x = idft(SpectralState(r, i, SpectralForm::Full, 4));
    for (int n = 0; n < 4; ++n) CHECK(x.values(n, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("idft reports an imaginary residue for asymmetric spectra") {
    // X_1 != conj(X_3): the synthesis has a genuinely complex output.
    Mat r(4, 1), i(4, 1);
    i(1, 0) = 1.0;
    i(3, 0) = 1.0; // Hermitian symmetry would need -1 here
    double residue = 0.0;
    const TemporalSeries x = idft(SpectralState(r, i, SpectralForm::Full, 4), &residue);
    CHECK(residue > 0.1);
    (void)x;
}

TEST_CASE("idft refuses compressed input") {
    Mat r(2, 1), i(2, 1);
    const SpectralState comp(r, i, SpectralForm::Compressed, 4);
    CHECK_THROWS_AS(idft(comp), FormError);
}

TEST_CASE("dft output of real input is Hermitian-symmetric") {
    Rng rng(13);
    for (int L : {4, 5, 8, 9, 64, 129}) {
        const SpectralState s = dft(random_series(L, 2, rng));
        CHECK(hermitian_asymmetry(s) < 1e-10 * spectral_norm(s));
    }
}

TEST_CASE("compress keeps K = floor(L/2) bins") {
    Rng rng(14);
    for (int L : {8, 5, 4}) {
        const SpectralState s = dft(random_series(L, 1, rng, /*zero_mean=*/true));
        const SpectralState c = compress(s);
        CHECK(c.bins() == L / 2);
        CHECK(c.source_length == L);
    }
}

TEST_CASE("compress folds the L=4 symmetric pattern") {
    // Spectrum [0, a+jb, c, a-jb] compresses to [a+jb, c] with zero Nyquist imag.
    const double a = 0.7, b = -0.3, c = 1.9;
    Mat r(4, 1), i(4, 1);
    r(1, 0) = a;
    i(1, 0) = b;
    r(2, 0) = c;
    r(3, 0) = a;
    i(3, 0) = -b;
    const SpectralState comp = compress(SpectralState(r, i, SpectralForm::Full, 4));
    CHECK(comp.real_part(0, 0) == a);
    CHECK(comp.imag_part(0, 0) == b);
    CHECK(comp.real_part(1, 0) == c);
    CHECK(comp.imag_part(1, 0) == 0.0);
}

TEST_CASE("odd lengths have no Nyquist bin") {
    Rng rng(15);
    const SpectralState s = dft(random_series(5, 1, rng, true));
    const SpectralState c = compress(s);
    CHECK(c.bins() == 2);
}

TEST_CASE("compress rejects uncentered and asymmetric spectra") {
    Rng rng(16);
    const TemporalSeries x = random_series(8, 1, rng);
    SpectralState s = dft(x);
    s.real_part(0, 0) = 1.0; // inject DC
    CHECK_THROWS_AS(compress(s), NormalizationError);

    SpectralState s2 = dft(random_series(8, 1, rng, true));
    s2.imag_part(3, 0) += 0.5; // break symmetry
    CHECK_THROWS_AS(compress(s2), SymmetryError);
}

TEST_CASE("decompress special cases") {
    SUBCASE("L=2 Nyquist") {
        Mat r(1, 1), i(1, 1);
        r(0, 0) = 3.0;
        i(0, 0) = 2.0; // imaginary Nyquist content is dropped
        const SpectralState full = decompress(SpectralState(r, i, SpectralForm::Compressed, 2));
        CHECK(full.real_part(0, 0) == 0.0);
        CHECK(full.real_part(1, 0) == 3.0);
        CHECK(full.imag_part(1, 0) == 0.0);
    }
    SUBCASE("L=3 conjugate mirroring") {
        Mat r(1, 1), i(1, 1);
        r(0, 0) = 1.0;
        i(0, 0) = 2.0;
        const SpectralState full = decompress(SpectralState(r, i, SpectralForm::Compressed, 3));
        CHECK(full.real_part(0, 0) == 0.0);
        CHECK(full.real_part(1, 0) == 1.0);
        CHECK(full.imag_part(1, 0) == 2.0);
        CHECK(full.real_part(2, 0) == 1.0);
        CHECK(full.imag_part(2, 0) == -2.0);
    }
}

TEST_CASE("compression round-trips exactly and losslessly") {
    Rng rng(17);
    for (int L : {4, 5, 64}) {
        const TemporalSeries x = random_series(L, 3, rng, true);
        const SpectralState comp = compress(dft(x));

        // compress(decompress(.)) is the identity on stored fields.
        const SpectralState back = compress(decompress(comp));
        for (size_t i = 0; i < comp.real_part.a.size(); ++i) {
            CHECK(back.real_part.a[i] == comp.real_part.a[i]);
            CHECK(back.imag_part.a[i] == comp.imag_part.a[i]);
        }

        // Whole pipeline returns the zero-mean series within 1e-10.
        const TemporalSeries y = idft(decompress(comp));
        for (size_t i = 0; i < x.values.a.size(); ++i)
            CHECK(std::abs(x.values.a[i] - y.values.a[i]) < 1e-10);

        // decompress output is a fixed point: compressing and rebuilding it
        // changes nothing, bitwise.
        const SpectralState full = decompress(comp);
        const SpectralState again = decompress(compress(full));
        for (size_t i = 0; i < full.real_part.a.size(); ++i) {
            CHECK(again.real_part.a[i] == full.real_part.a[i]);
            CHECK(again.imag_part.a[i] == full.imag_part.a[i]);
        }
    }
}

TEST_CASE("optimized dft matches the direct serial reference") {
    Rng rng(18);
    for (int L : {4, 5, 8, 9, 16, 24, 64, 97, 128}) {
        const TemporalSeries x = random_series(L, 2, rng);
        const SpectralState fast = dft(x);
        const SpectralState ref = reference::dft_direct(x);
        double worst = 0.0;
        for (size_t i = 0; i < fast.real_part.a.size(); ++i) {
            worst = std::max(worst, std::abs(fast.real_part.a[i] - ref.real_part.a[i]));
            worst = std::max(worst, std::abs(fast.imag_part.a[i] - ref.imag_part.a[i]));
        }
        CHECK(worst < 1e-10 * std::max(1.0, spectral_norm(ref)));
    }
}
