#pragma once

#include <string>
#include <vector>

namespace pacodi {

// Closed-form FLOPs accounting. Counting convention (one multiply-add = one
// FLOP, stated in output headers):
//   attention core  = 2 L^2 C per block (score matmul + value matmul)
//   linear / FFN    = 8 L C^2 per block (two C <-> 4C maps)
//   FFT overhead    = 2 * 5 L log2 L per forward/inverse transform pair,
//                     counted once per sample, not per block
// The two-branch layout substitutes L -> K = floor(L/2) per branch and
// doubles. Attention halves exactly for even L; linear is iso-FLOPs; the FFT
// term vanishes relative to attention as L grows.
struct FlopsBreakdown {
    long long sequence_length = 0;
    long long width = 0;
    long long blocks = 0;
    long long heads = 0;
    double attention_flops_temporal = 0.0;
    double attention_flops_pacodi = 0.0;
    double linear_flops_temporal = 0.0;
    double linear_flops_pacodi = 0.0;
    double fft_overhead_flops = 0.0;
    double savings_ratio_attention = 0.0; // 1 - pacodi/temporal
    double savings_ratio_total = 0.0;     // over attention + FFT (linear is iso)
};

FlopsBreakdown count_flops(int sequence_length, int width, int blocks, int heads);

struct SavingsPoint {
    int sequence_length = 0;
    int width = 0;
    double savings_ratio_total = 0.0;
};

// Savings across lengths under a width rule (width = rule(L); the default
// elsewhere is width = L). The total ratio covers the terms that change
// between the layouts: attention plus FFT overhead. Linear layers are
// iso-FLOPs by construction and are reported separately by count_flops.
std::vector<SavingsPoint> savings_curve(const std::vector<int>& lengths,
                                        const std::vector<int>& widths, int blocks, int heads);

struct WallTimePoint {
    int sequence_length = 0;
    double temporal_ms = 0.0;
    double pacodi_ms = 0.0;
};

// Median-of-reps single-thread forward-pass timing of a monolithic L-token
// stack against the two-branch K-token layout at equal width. Informational.
std::vector<WallTimePoint> measure_wall_time(const std::vector<int>& lengths, int width,
                                             int blocks, int heads, int reps);

// Plain-text sparkline of the savings curve for terminal output.
std::string savings_sparkline(const std::vector<SavingsPoint>& curve);

} // namespace pacodi
