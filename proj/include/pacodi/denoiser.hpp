#pragma once

#include "pacodi/rng.hpp"
#include "pacodi/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace pacodi {

// Two-branch noise predictor over compressed spectra. Each quadrature branch
// runs multi-head self-attention over its own K tokens; the branches talk
// through the feed-forward of every block. Interactive coupling concatenates
// the two normed streams featurewise (K x 2C), runs one shared FFN
// 2C -> 4C -> 2C, and splits the output back into per-branch residual
// corrections. The decoupled variant replaces that with two independent
// per-branch FFNs C -> 4C -> C and has no cross wiring at all.
enum class BranchCoupling { Interactive, Decoupled };

// How a branch sees its counterpart before the shared FFN: the raw attention
// stream (identity), or through a learned C x C map.
enum class CounterpartProjector { Identity, Linear };

struct DenoiserConfig {
    int tokens = 0;   // K, compressed bin count
    int channels = 0; // D
    int width = 32;   // C
    int heads = 4;
    int blocks = 2;
    int time_embed_dim = 32;
    BranchCoupling coupling = BranchCoupling::Interactive;
    CounterpartProjector projector = CounterpartProjector::Identity;

    void validate() const;
    int head_dim() const { return width / heads; }
};

struct BranchBlockParams {
    Mat ln1_g, ln1_b; // 1 x C, pre-attention norm
    Mat ln2_g, ln2_b; // 1 x C, pre-FFN norm
    Mat wq, wk, wv, wo; // C x C
};

struct BlockParams {
    BranchBlockParams real, imag;
    // Interactive: shared FFN over the concatenated streams.
    Mat ffn_w1, ffn_b1, ffn_w2, ffn_b2; // 2C x 4C, 1 x 4C, 4C x 2C, 1 x 2C
    // Optional learned counterpart projectors (interactive + Linear only).
    Mat proj_r, proj_i; // C x C
    // Decoupled: independent per-branch FFNs.
    Mat ffn_r_w1, ffn_r_b1, ffn_r_w2, ffn_r_b2; // C x 4C, ...
    Mat ffn_i_w1, ffn_i_b1, ffn_i_w2, ffn_i_b2;
};

struct DenoiserParams {
    DenoiserConfig config;
    Mat in_w_r, in_b_r; // D x C, 1 x C
    Mat in_w_i, in_b_i;
    Mat time_w1, time_b1; // Te x C, 1 x C
    Mat time_w2, time_b2; // C x C, 1 x C
    std::vector<BlockParams> blocks;
    Mat head_w_r, head_b_r; // C x D, 1 x D (zero-initialized)
    Mat head_w_i, head_b_i;

    // Deterministic enumeration of every allocated tensor, used by the
    // optimizer, checkpointing, counting and gradient checks.
    void for_each_tensor(const std::function<void(const std::string&, Mat&)>& fn);
    void for_each_tensor(const std::function<void(const std::string&, const Mat&)>& fn) const;

    size_t total_parameters() const;
};

// Gradients mirror the parameter layout tensor for tensor.
using GradientBundle = DenoiserParams;

// Weights from scaled-uniform fan-in init; output heads zero so a fresh
// network predicts zero noise; LN gains 1.
DenoiserParams init_params(const DenoiserConfig& config, Rng& rng);

GradientBundle zeros_like(const DenoiserParams& params);

// Raw sinusoidal embedding of the diffusion step (pair layout sin, cos).
std::vector<double> time_embedding(int t, int steps, int dim);

// Opaque activation cache captured by forward() for the backward pass.
struct DenoiserCache;

struct DenoiserOutput {
    Mat eps_r; // K x D
    Mat eps_i;
};

// Forward pass; fills *cache when given (required before backward()).
DenoiserOutput denoiser_forward(const DenoiserParams& params, const Mat& R, const Mat& I, int t,
                                int total_steps, DenoiserCache* cache = nullptr);

// Exact reverse-mode gradients of a scalar loss with the given gradients
// w.r.t. the two outputs. Throws if the cache is missing/stale.
GradientBundle denoiser_backward(const DenoiserParams& params, const DenoiserCache& cache,
                                 const Mat& grad_eps_r, const Mat& grad_eps_i);

// Cache definition lives here so callers can hold one by value.
struct LnCache {
    Mat xhat;
    std::vector<double> inv_std;
};

struct AttnCache {
    Mat normed; // LN output fed to QKV
    Mat q, k, v;
    std::vector<Mat> probs; // per head, K x K
    Mat concat;             // head outputs before the output projection
};

struct BlockCache {
    LnCache ln1_r, ln1_i, ln2_r, ln2_i;
    AttnCache attn_r, attn_i;
    Mat normed_r, normed_i; // LN2 outputs
    Mat z;                  // FFN input (concat or per-branch)
    Mat u, act;             // shared FFN internals
    Mat u_r, act_r, u_i, act_i; // decoupled FFN internals
};

struct DenoiserCache {
    bool valid = false;
    int step = 0;
    Mat in_r, in_i;     // raw K x D inputs
    Mat t_raw;          // 1 x Te sinusoid
    Mat t_u, t_act;     // time MLP internals
    std::vector<BlockCache> blocks;
    Mat final_r, final_i; // streams entering the heads
};

} // namespace pacodi
