#pragma once

#include <cassert>
#include <stdexcept>
#include <string>
#include <vector>

namespace pacodi {

// Error taxonomy shared across modules.
struct InvalidInputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct FormError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SymmetryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NormalizationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dense row-major matrix of doubles. Small by design: everything in this
// project is desk-scale and double precision.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

    static Mat zeros(int r, int c) { return Mat(r, c); }

    double& operator()(int r, int c) {
        assert(r >= 0 && r < rows && c >= 0 && c < cols);
        return a[static_cast<size_t>(r) * cols + c];
    }
    double operator()(int r, int c) const {
        assert(r >= 0 && r < rows && c >= 0 && c < cols);
        return a[static_cast<size_t>(r) * cols + c];
    }

    size_t size() const { return a.size(); }
    bool empty() const { return a.empty(); }
    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

    void fill(double v) { std::fill(a.begin(), a.end(), v); }
    void set_zero() { fill(0.0); }
};

// Real L x D sample: rows index time, columns index channels.
struct TemporalSeries {
    Mat values;

    TemporalSeries() = default;
    explicit TemporalSeries(int length, int channels) : values(length, channels) {}
    explicit TemporalSeries(Mat v) : values(std::move(v)) {}

    int length() const { return values.rows; }
    int channels() const { return values.cols; }
};

enum class SpectralForm { Full, Compressed };

// Paired real/imaginary matrices of a spectrum, bins x channels.
// Full form holds all L bins; Compressed holds bins 1..K, K = floor(L/2),
// with the original length recorded so the full form can be rebuilt.
struct SpectralState {
    Mat real_part;
    Mat imag_part;
    SpectralForm form = SpectralForm::Full;
    int source_length = 0;

    SpectralState() = default;
    SpectralState(Mat re, Mat im, SpectralForm f, int src_len)
        : real_part(std::move(re)), imag_part(std::move(im)), form(f), source_length(src_len) {}

    int bins() const { return real_part.rows; }
    int channels() const { return real_part.cols; }
    bool compressed() const { return form == SpectralForm::Compressed; }
};

inline int compressed_bins(int length) { return length / 2; }
inline bool has_nyquist(int length) { return length % 2 == 0; }

} // namespace pacodi
