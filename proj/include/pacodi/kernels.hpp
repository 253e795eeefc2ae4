#pragma once

#include "pacodi/types.hpp"

namespace pacodi::kernels {

// out = A * B. A is m x k, B is k x n. OpenMP over rows above a size cutoff.
void matmul(const Mat& A, const Mat& B, Mat& out);
// out = A^T * B. A is k x m, B is k x n.
void matmul_at_b(const Mat& A, const Mat& B, Mat& out);
// out = A * B^T. A is m x k, B is n x k.
void matmul_a_bt(const Mat& A, const Mat& B, Mat& out);

Mat matmul(const Mat& A, const Mat& B);
Mat matmul_at_b(const Mat& A, const Mat& B);
Mat matmul_a_bt(const Mat& A, const Mat& B);

// y += x
void add_inplace(Mat& y, const Mat& x);
// broadcast a 1 x C row onto every row of y
void add_row_broadcast(Mat& y, const Mat& row);

// Row-wise softmax in place.
void softmax_rows(Mat& m);

double silu(double x);
double silu_grad(double x);

} // namespace pacodi::kernels

namespace pacodi::reference {

// Serial naive matmul kept as the correctness oracle for the parallel kernel.
void matmul_serial(const Mat& A, const Mat& B, Mat& out);

} // namespace pacodi::reference
