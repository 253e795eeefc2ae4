#include "pacodi/kernels.hpp"

#include <cmath>

namespace pacodi::kernels {

namespace {
// Entering an OpenMP region costs ~10 us on this class of machine even when
// the if-clause is false, so small products must branch before the pragma.
constexpr long kParallelCutoff = 1L << 20;

inline void matmul_rows(const Mat& A, const Mat& B, Mat& out, int row_begin, int row_end) {
    const int k = A.cols, n = B.cols;
    for (int i = row_begin; i < row_end; ++i) {
        double* orow = &out.a[static_cast<size_t>(i) * n];
        const double* arow = &A.a[static_cast<size_t>(i) * k];
        for (int p = 0; p < k; ++p) {
            const double av = arow[p];
            if (av == 0.0) continue;
            const double* brow = &B.a[static_cast<size_t>(p) * n];
            for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
}

inline void matmul_at_b_rows(const Mat& A, const Mat& B, Mat& out, int row_begin, int row_end) {
    const int k = A.rows, m = A.cols, n = B.cols;
    for (int i = row_begin; i < row_end; ++i) {
        double* orow = &out.a[static_cast<size_t>(i) * n];
        for (int p = 0; p < k; ++p) {
            const double av = A.a[static_cast<size_t>(p) * m + i];
            if (av == 0.0) continue;
            const double* brow = &B.a[static_cast<size_t>(p) * n];
            for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
}

inline void matmul_a_bt_rows(const Mat& A, const Mat& B, Mat& out, int row_begin, int row_end) {
    const int k = A.cols, n = B.rows;
    for (int i = row_begin; i < row_end; ++i) {
        const double* arow = &A.a[static_cast<size_t>(i) * k];
        double* orow = &out.a[static_cast<size_t>(i) * n];
        for (int j = 0; j < n; ++j) {
            const double* brow = &B.a[static_cast<size_t>(j) * k];
            double acc = 0.0;
            for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
            orow[j] = acc;
        }
    }
}

} // namespace

void matmul(const Mat& A, const Mat& B, Mat& out) {
    assert(A.cols == B.rows);
    out = Mat(A.rows, B.cols);
    const long work = static_cast<long>(A.rows) * A.cols * B.cols;
    if (work > kParallelCutoff) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < A.rows; ++i) matmul_rows(A, B, out, i, i + 1);
    } else {
        matmul_rows(A, B, out, 0, A.rows);
    }
}

void matmul_at_b(const Mat& A, const Mat& B, Mat& out) {
    assert(A.rows == B.rows);
    out = Mat(A.cols, B.cols);
    const long work = static_cast<long>(A.rows) * A.cols * B.cols;
    if (work > kParallelCutoff) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < A.cols; ++i) matmul_at_b_rows(A, B, out, i, i + 1);
    } else {
        matmul_at_b_rows(A, B, out, 0, A.cols);
    }
}

void matmul_a_bt(const Mat& A, const Mat& B, Mat& out) {
    assert(A.cols == B.cols);
    out = Mat(A.rows, B.rows);
    const long work = static_cast<long>(A.rows) * A.cols * B.rows;
    if (work > kParallelCutoff) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < A.rows; ++i) matmul_a_bt_rows(A, B, out, i, i + 1);
    } else {
        matmul_a_bt_rows(A, B, out, 0, A.rows);
    }
}

Mat matmul(const Mat& A, const Mat& B) {
    Mat out;
    matmul(A, B, out);
    return out;
}
Mat matmul_at_b(const Mat& A, const Mat& B) {
    Mat out;
    matmul_at_b(A, B, out);
    return out;
}
Mat matmul_a_bt(const Mat& A, const Mat& B) {
    Mat out;
    matmul_a_bt(A, B, out);
    return out;
}

void add_inplace(Mat& y, const Mat& x) {
    assert(y.same_shape(x));
    for (size_t i = 0; i < y.a.size(); ++i) y.a[i] += x.a[i];
}

void add_row_broadcast(Mat& y, const Mat& row) {
    assert(row.rows == 1 && row.cols == y.cols);
    for (int i = 0; i < y.rows; ++i)
        for (int j = 0; j < y.cols; ++j) y(i, j) += row(0, j);
}

void softmax_rows(Mat& m) {
    for (int i = 0; i < m.rows; ++i) {
        double* row = &m.a[static_cast<size_t>(i) * m.cols];
        double mx = row[0];
        for (int j = 1; j < m.cols; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (int j = 0; j < m.cols; ++j) {
            row[j] = std::exp(row[j] - mx);
            sum += row[j];
        }
        const double inv = 1.0 / sum;
        for (int j = 0; j < m.cols; ++j) row[j] *= inv;
    }
}

double silu(double x) {
    const double s = 1.0 / (1.0 + std::exp(-x));
    return x * s;
}

double silu_grad(double x) {
    const double s = 1.0 / (1.0 + std::exp(-x));
    return s * (1.0 + x * (1.0 - s));
}

} // namespace pacodi::kernels

namespace pacodi::reference {

void matmul_serial(const Mat& A, const Mat& B, Mat& out) {
    assert(A.cols == B.rows);
    out = Mat(A.rows, B.cols);
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < B.cols; ++j) {
            double acc = 0.0;
            for (int p = 0; p < A.cols; ++p) acc += A(i, p) * B(p, j);
            out(i, j) = acc;
        }
}

} // namespace pacodi::reference
