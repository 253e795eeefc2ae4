// Kernel benchmark: the parallel/optimized paths against their serial
// reference twins, plus the two-branch forward against a monolithic stack.
// Informational; correctness deltas are printed alongside the timings.

#include "pacodi/complexity.hpp"
#include "pacodi/kernels.hpp"
#include "pacodi/spectral_transform.hpp"
#include "pacodi/theorem_lab.hpp"

#include <chrono>
#include <cstdio>
#include <functional>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace pacodi;

namespace {

double time_ms(int reps, const std::function<void()>& fn) {
    fn(); // warm-up
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
               .count() /
           reps;
}

Mat random_mat(int r, int c, Rng& rng) {
    Mat m(r, c);
    for (double& v : m.a) v = rng.normal();
    return m;
}

double max_abs_diff(const Mat& a, const Mat& b) {
    double worst = 0.0;
    for (size_t i = 0; i < a.a.size(); ++i) worst = std::max(worst, std::abs(a.a[i] - b.a[i]));
    return worst;
}

void bench_matmul() {
    std::printf("\n== matmul: serial reference vs kernel ==\n");
    std::printf("%6s %6s %12s %12s %10s\n", "n", "reps", "serial_ms", "kernel_ms", "max_diff");
    Rng rng(1);
    for (int n : {32, 128, 256, 512}) {
        const Mat a = random_mat(n, n, rng);
        const Mat b = random_mat(n, n, rng);
        Mat ref, fast;
        const int reps = n <= 128 ? 20 : 4;
        const double t_ref = time_ms(reps, [&] { reference::matmul_serial(a, b, ref); });
        const double t_fast = time_ms(reps, [&] { kernels::matmul(a, b, fast); });
        std::printf("%6d %6d %12.3f %12.3f %10.2e\n", n, reps, t_ref, t_fast,
                    max_abs_diff(ref, fast));
    }
}

void bench_dft() {
    std::printf("\n== dft: direct serial reference vs FFT/table ==\n");
    std::printf("%6s %6s %12s %12s %10s\n", "L", "reps", "direct_ms", "fast_ms", "max_diff");
    Rng rng(2);
    for (int L : {64, 256, 1000, 1024, 4096}) {
        TemporalSeries x(L, 2);
        for (double& v : x.values.a) v = rng.normal();
        const int reps = L <= 1024 ? 10 : 3;
        SpectralState ref_out, fast_out;
        const double t_ref = time_ms(reps, [&] { ref_out = reference::dft_direct(x); });
        const double t_fast = time_ms(reps, [&] { fast_out = dft(x); });
        const double diff = std::max(max_abs_diff(ref_out.real_part, fast_out.real_part),
                                     max_abs_diff(ref_out.imag_part, fast_out.imag_part));
        std::printf("%6d %6d %12.3f %12.3f %10.2e\n", L, reps, t_ref, t_fast, diff);
    }
}

void bench_monte_carlo() {
    std::printf("\n== covariance estimation: 1 thread vs all threads ==\n");
    std::printf("(identical chunk reduction order, so results are bitwise equal)\n");
    std::printf("%6s %10s %14s\n", "L", "draws", "wall_ms");
#ifdef _OPENMP
    for (int threads : {1, omp_get_max_threads()}) {
        omp_set_num_threads(threads);
#else
    {
        const int threads = 1;
#endif
        for (int L : {8, 24}) {
            const double t =
                time_ms(1, [&] { (void)check_covariance_structure(L, 1.0, 200000, 7); });
            std::printf("%6d %10d %14.1f  (%d thread%s)\n", L, 200000, t, threads,
                        threads == 1 ? "" : "s");
        }
    }
}

void bench_forward() {
    std::printf("\n== forward pass: monolithic L tokens vs two K-token branches ==\n");
    std::printf("%6s %14s %12s %8s\n", "L", "temporal_ms", "pacodi_ms", "ratio");
    for (const auto& p : measure_wall_time({24, 64, 128, 256, 512}, 64, 2, 4, 5))
        std::printf("%6d %14.3f %12.3f %8.3f\n", p.sequence_length, p.temporal_ms, p.pacodi_ms,
                    p.pacodi_ms / p.temporal_ms);
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP disabled (serial build)\n");
#endif
    bench_matmul();
    bench_dft();
    bench_monte_carlo();
    bench_forward();
    return 0;
}
