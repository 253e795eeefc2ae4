#include "pacodi/denoiser.hpp"

#include "pacodi/kernels.hpp"

#include <cmath>
#include <map>

namespace pacodi {

using kernels::matmul;
using kernels::matmul_a_bt;
using kernels::matmul_at_b;

void DenoiserConfig::validate() const {
    if (tokens <= 0 || channels <= 0 || width <= 0 || heads <= 0 || blocks <= 0 ||
        time_embed_dim <= 0)
        throw InvalidInputError("denoiser config: all dimensions must be positive");
    if (width % heads != 0)
        throw InvalidInputError("denoiser config: width must be divisible by heads");
    if (time_embed_dim % 2 != 0)
        throw InvalidInputError("denoiser config: time_embed_dim must be even");
}

namespace {

Mat hcat(const Mat& a, const Mat& b) {
    assert(a.rows == b.rows);
    Mat out(a.rows, a.cols + b.cols);
    for (int i = 0; i < a.rows; ++i) {
        for (int j = 0; j < a.cols; ++j) out(i, j) = a(i, j);
        for (int j = 0; j < b.cols; ++j) out(i, a.cols + j) = b(i, j);
    }
    return out;
}

Mat cols(const Mat& m, int start, int count) {
    Mat out(m.rows, count);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < count; ++j) out(i, j) = m(i, start + j);
    return out;
}

void add_cols(Mat& dst, const Mat& src, int start) {
    for (int i = 0; i < src.rows; ++i)
        for (int j = 0; j < src.cols; ++j) dst(i, start + j) += src(i, j);
}

Mat colsum(const Mat& m) {
    Mat out(1, m.cols);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) out(0, j) += m(i, j);
    return out;
}

constexpr double kLnEps = 1e-5;

Mat ln_forward(const Mat& x, const Mat& gain, const Mat& bias, LnCache& cache) {
    const int rows = x.rows, c = x.cols;
    cache.xhat = Mat(rows, c);
    cache.inv_std.assign(rows, 0.0);
    Mat y(rows, c);
    for (int i = 0; i < rows; ++i) {
        double mean = 0.0;
        for (int j = 0; j < c; ++j) mean += x(i, j);
        mean /= c;
        double var = 0.0;
        for (int j = 0; j < c; ++j) {
            const double d = x(i, j) - mean;
            var += d * d;
        }
        var /= c;
        const double inv = 1.0 / std::sqrt(var + kLnEps);
        cache.inv_std[i] = inv;
        for (int j = 0; j < c; ++j) {
            const double xh = (x(i, j) - mean) * inv;
            cache.xhat(i, j) = xh;
            y(i, j) = gain(0, j) * xh + bias(0, j);
        }
    }
    return y;
}

Mat ln_backward(const Mat& dy, const Mat& gain, const LnCache& cache, Mat& dgain, Mat& dbias) {
    const int rows = dy.rows, c = dy.cols;
    Mat dx(rows, c);
    for (int i = 0; i < rows; ++i) {
        double sum_dxh = 0.0, sum_dxh_xh = 0.0;
        for (int j = 0; j < c; ++j) {
            const double g = dy(i, j) * gain(0, j);
            sum_dxh += g;
            sum_dxh_xh += g * cache.xhat(i, j);
            dgain(0, j) += dy(i, j) * cache.xhat(i, j);
            dbias(0, j) += dy(i, j);
        }
        const double inv = cache.inv_std[i];
        for (int j = 0; j < c; ++j) {
            const double dxh = dy(i, j) * gain(0, j);
            dx(i, j) = inv / c * (c * dxh - sum_dxh - cache.xhat(i, j) * sum_dxh_xh);
        }
    }
    return dx;
}

Mat attn_forward(const Mat& normed, const BranchBlockParams& p, int heads, AttnCache& cache) {
    const int k_tokens = normed.rows;
    const int c = normed.cols;
    const int dh = c / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    cache.normed = normed;
    matmul(normed, p.wq, cache.q);
    matmul(normed, p.wk, cache.k);
    matmul(normed, p.wv, cache.v);
    cache.probs.assign(heads, Mat());
    cache.concat = Mat(k_tokens, c);

    for (int h = 0; h < heads; ++h) {
        const Mat qh = cols(cache.q, h * dh, dh);
        const Mat kh = cols(cache.k, h * dh, dh);
        const Mat vh = cols(cache.v, h * dh, dh);
        Mat scores = matmul_a_bt(qh, kh);
        for (double& s : scores.a) s *= scale;
        kernels::softmax_rows(scores);
        cache.probs[h] = scores;
        const Mat oh = matmul(scores, vh);
        add_cols(cache.concat, oh, h * dh);
    }
    return matmul(cache.concat, p.wo);
}

Mat attn_backward(const Mat& dy, const BranchBlockParams& p, const AttnCache& cache, int heads,
                  Mat& g_wq, Mat& g_wk, Mat& g_wv, Mat& g_wo) {
    const int k_tokens = dy.rows;
    const int c = dy.cols;
    const int dh = c / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    kernels::add_inplace(g_wo, matmul_at_b(cache.concat, dy));
    const Mat dconcat = matmul_a_bt(dy, p.wo);

    Mat dq(k_tokens, c), dk(k_tokens, c), dv(k_tokens, c);
    for (int h = 0; h < heads; ++h) {
        const Mat doh = cols(dconcat, h * dh, dh);
        const Mat qh = cols(cache.q, h * dh, dh);
        const Mat kh = cols(cache.k, h * dh, dh);
        const Mat vh = cols(cache.v, h * dh, dh);
        const Mat& probs = cache.probs[h];

        Mat dprobs = matmul_a_bt(doh, vh);
        add_cols(dv, matmul_at_b(probs, doh), h * dh);

        // Softmax backward, row-wise.
        Mat dscores(k_tokens, k_tokens);
        for (int i = 0; i < k_tokens; ++i) {
            double dot = 0.0;
            for (int j = 0; j < k_tokens; ++j) dot += dprobs(i, j) * probs(i, j);
            for (int j = 0; j < k_tokens; ++j)
                dscores(i, j) = probs(i, j) * (dprobs(i, j) - dot);
        }
        for (double& s : dscores.a) s *= scale;

        add_cols(dq, matmul(dscores, kh), h * dh);
        add_cols(dk, matmul_at_b(dscores, qh), h * dh);
    }

    kernels::add_inplace(g_wq, matmul_at_b(cache.normed, dq));
    kernels::add_inplace(g_wk, matmul_at_b(cache.normed, dk));
    kernels::add_inplace(g_wv, matmul_at_b(cache.normed, dv));

    Mat dn = matmul_a_bt(dq, p.wq);
    kernels::add_inplace(dn, matmul_a_bt(dk, p.wk));
    kernels::add_inplace(dn, matmul_a_bt(dv, p.wv));
    return dn;
}

void init_linear(Mat& w, Rng& rng) {
    const double bound = std::sqrt(1.0 / w.rows);
    for (double& v : w.a) v = rng.uniform(-bound, bound);
}

} // namespace

void DenoiserParams::for_each_tensor(
    const std::function<void(const std::string&, Mat&)>& fn) {
    fn("in_w_r", in_w_r);
    fn("in_b_r", in_b_r);
    fn("in_w_i", in_w_i);
    fn("in_b_i", in_b_i);
    fn("time_w1", time_w1);
    fn("time_b1", time_b1);
    fn("time_w2", time_w2);
    fn("time_b2", time_b2);
    for (size_t b = 0; b < blocks.size(); ++b) {
        auto& blk = blocks[b];
        const std::string pre = "block" + std::to_string(b) + ".";
        auto branch = [&](const std::string& name, BranchBlockParams& br) {
            fn(pre + name + ".ln1_g", br.ln1_g);
            fn(pre + name + ".ln1_b", br.ln1_b);
            fn(pre + name + ".ln2_g", br.ln2_g);
            fn(pre + name + ".ln2_b", br.ln2_b);
            fn(pre + name + ".wq", br.wq);
            fn(pre + name + ".wk", br.wk);
            fn(pre + name + ".wv", br.wv);
            fn(pre + name + ".wo", br.wo);
        };
        branch("real", blk.real);
        branch("imag", blk.imag);
        if (config.coupling == BranchCoupling::Interactive) {
            fn(pre + "ffn_w1", blk.ffn_w1);
            fn(pre + "ffn_b1", blk.ffn_b1);
            fn(pre + "ffn_w2", blk.ffn_w2);
            fn(pre + "ffn_b2", blk.ffn_b2);
            if (config.projector == CounterpartProjector::Linear) {
                fn(pre + "proj_r", blk.proj_r);
                fn(pre + "proj_i", blk.proj_i);
            }
        } else {
            fn(pre + "ffn_r_w1", blk.ffn_r_w1);
            fn(pre + "ffn_r_b1", blk.ffn_r_b1);
            fn(pre + "ffn_r_w2", blk.ffn_r_w2);
            fn(pre + "ffn_r_b2", blk.ffn_r_b2);
            fn(pre + "ffn_i_w1", blk.ffn_i_w1);
            fn(pre + "ffn_i_b1", blk.ffn_i_b1);
            fn(pre + "ffn_i_w2", blk.ffn_i_w2);
            fn(pre + "ffn_i_b2", blk.ffn_i_b2);
        }
    }
    fn("head_w_r", head_w_r);
    fn("head_b_r", head_b_r);
    fn("head_w_i", head_w_i);
    fn("head_b_i", head_b_i);
}

void DenoiserParams::for_each_tensor(
    const std::function<void(const std::string&, const Mat&)>& fn) const {
    const_cast<DenoiserParams*>(this)->for_each_tensor(
        [&](const std::string& name, Mat& m) { fn(name, m); });
}

size_t DenoiserParams::total_parameters() const {
    size_t n = 0;
    for_each_tensor([&](const std::string&, const Mat& m) { n += m.size(); });
    return n;
}

DenoiserParams init_params(const DenoiserConfig& config, Rng& rng) {
    config.validate();
    const int c = config.width;
    const int d = config.channels;
    const int te = config.time_embed_dim;

    DenoiserParams p;
    p.config = config;
    p.in_w_r = Mat(d, c);
    p.in_b_r = Mat(1, c);
    p.in_w_i = Mat(d, c);
    p.in_b_i = Mat(1, c);
    p.time_w1 = Mat(te, c);
    p.time_b1 = Mat(1, c);
    p.time_w2 = Mat(c, c);
    p.time_b2 = Mat(1, c);
    p.blocks.resize(config.blocks);
    for (auto& blk : p.blocks) {
        for (BranchBlockParams* br : {&blk.real, &blk.imag}) {
            br->ln1_g = Mat(1, c);
            br->ln1_g.fill(1.0);
            br->ln1_b = Mat(1, c);
            br->ln2_g = Mat(1, c);
            br->ln2_g.fill(1.0);
            br->ln2_b = Mat(1, c);
            br->wq = Mat(c, c);
            br->wk = Mat(c, c);
            br->wv = Mat(c, c);
            br->wo = Mat(c, c);
        }
        if (config.coupling == BranchCoupling::Interactive) {
            blk.ffn_w1 = Mat(2 * c, 4 * c);
            blk.ffn_b1 = Mat(1, 4 * c);
            blk.ffn_w2 = Mat(4 * c, 2 * c);
            blk.ffn_b2 = Mat(1, 2 * c);
            if (config.projector == CounterpartProjector::Linear) {
                blk.proj_r = Mat(c, c);
                blk.proj_i = Mat(c, c);
            }
        } else {
            blk.ffn_r_w1 = Mat(c, 4 * c);
            blk.ffn_r_b1 = Mat(1, 4 * c);
            blk.ffn_r_w2 = Mat(4 * c, c);
            blk.ffn_r_b2 = Mat(1, c);
            blk.ffn_i_w1 = Mat(c, 4 * c);
            blk.ffn_i_b1 = Mat(1, 4 * c);
            blk.ffn_i_w2 = Mat(4 * c, c);
            blk.ffn_i_b2 = Mat(1, c);
        }
    }
    p.head_w_r = Mat(c, d);
    p.head_b_r = Mat(1, d);
    p.head_w_i = Mat(c, d);
    p.head_b_i = Mat(1, d);

    // Fill weight matrices in enumeration order so the same seed always
    // yields identical parameters. Heads stay zero; biases 0; LN gains 1.
    p.for_each_tensor([&](const std::string& name, Mat& m) {
        const bool is_head = name.rfind("head_", 0) == 0;
        auto ends_with = [&](const char* suf) {
            const size_t n = std::char_traits<char>::length(suf);
            return name.size() >= n && name.compare(name.size() - n, n, suf) == 0;
        };
        const bool is_weight = name.find("_w") != std::string::npos ||
                               name.find("proj_") != std::string::npos || ends_with("wq") ||
                               ends_with("wk") || ends_with("wv") || ends_with("wo");
        if (is_head || !is_weight) return;
        init_linear(m, rng);
    });
    return p;
}

GradientBundle zeros_like(const DenoiserParams& params) {
    GradientBundle g = params;
    g.for_each_tensor([](const std::string&, Mat& m) { m.set_zero(); });
    return g;
}

std::vector<double> time_embedding(int t, int steps, int dim) {
    if (t < 0 || (steps > 0 && t > steps))
        throw InvalidInputError("time_embedding: step out of range");
    if (dim < 2 || dim % 2 != 0)
        throw InvalidInputError("time_embedding: dim must be even and >= 2");
    std::vector<double> emb(dim);
    const int half = dim / 2;
    for (int i = 0; i < half; ++i) {
        const double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) / half);
        emb[2 * i] = std::sin(t * freq);
        emb[2 * i + 1] = std::cos(t * freq);
    }
    return emb;
}

namespace {

// Frequency position matters: attention alone is permutation-equivariant, so
// each token carries a fixed sinusoidal encoding of its bin index. Added to
// both branches identically; no learnable parameters.
const Mat& bin_position_encoding(int tokens, int width) {
    thread_local std::map<std::pair<int, int>, Mat> cache;
    Mat& pe = cache[{tokens, width}];
    if (!pe.empty()) return pe;
    pe = Mat(tokens, width);
    const int half = width / 2;
    for (int k = 0; k < tokens; ++k) {
        for (int i = 0; i < half; ++i) {
            const double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) / half);
            pe(k, 2 * i) = std::sin((k + 1) * freq);
            pe(k, 2 * i + 1) = std::cos((k + 1) * freq);
        }
        if (width % 2 == 1) pe(k, width - 1) = std::sin((k + 1) * 0.5);
    }
    return pe;
}

} // namespace

DenoiserOutput denoiser_forward(const DenoiserParams& params, const Mat& R, const Mat& I, int t,
                                int total_steps, DenoiserCache* cache) {
    const auto& cfg = params.config;
    if (R.rows != cfg.tokens || R.cols != cfg.channels || !R.same_shape(I))
        throw InvalidInputError("denoiser_forward: input shape does not match config");

    DenoiserCache local;
    DenoiserCache& cc = cache ? *cache : local;
    cc = DenoiserCache{};
    cc.step = t;
    cc.in_r = R;
    cc.in_i = I;

    // Time conditioning: sinusoid -> two-layer map, added to both branches.
    const auto sinusoid = time_embedding(t, total_steps, cfg.time_embed_dim);
    cc.t_raw = Mat(1, cfg.time_embed_dim);
    for (int j = 0; j < cfg.time_embed_dim; ++j) cc.t_raw(0, j) = sinusoid[j];
    matmul(cc.t_raw, params.time_w1, cc.t_u);
    kernels::add_inplace(cc.t_u, params.time_b1);
    cc.t_act = cc.t_u;
    for (double& v : cc.t_act.a) v = kernels::silu(v);
    Mat temb = matmul(cc.t_act, params.time_w2);
    kernels::add_inplace(temb, params.time_b2);

    const Mat& pos = bin_position_encoding(cfg.tokens, cfg.width);
    Mat h_r = matmul(R, params.in_w_r);
    kernels::add_row_broadcast(h_r, params.in_b_r);
    kernels::add_row_broadcast(h_r, temb);
    kernels::add_inplace(h_r, pos);
    Mat h_i = matmul(I, params.in_w_i);
    kernels::add_row_broadcast(h_i, params.in_b_i);
    kernels::add_row_broadcast(h_i, temb);
    kernels::add_inplace(h_i, pos);

    cc.blocks.resize(cfg.blocks);
    for (int b = 0; b < cfg.blocks; ++b) {
        const BlockParams& blk = params.blocks[b];
        BlockCache& bc = cc.blocks[b];

        // Attention sublayer (pre-norm, residual).
        Mat n_r = ln_forward(h_r, blk.real.ln1_g, blk.real.ln1_b, bc.ln1_r);
        kernels::add_inplace(h_r, attn_forward(n_r, blk.real, cfg.heads, bc.attn_r));
        Mat n_i = ln_forward(h_i, blk.imag.ln1_g, blk.imag.ln1_b, bc.ln1_i);
        kernels::add_inplace(h_i, attn_forward(n_i, blk.imag, cfg.heads, bc.attn_i));

        // Feed-forward sublayer (pre-norm, residual).
        bc.normed_r = ln_forward(h_r, blk.real.ln2_g, blk.real.ln2_b, bc.ln2_r);
        bc.normed_i = ln_forward(h_i, blk.imag.ln2_g, blk.imag.ln2_b, bc.ln2_i);

        if (cfg.coupling == BranchCoupling::Interactive) {
            Mat zr = bc.normed_r, zi = bc.normed_i;
            if (cfg.projector == CounterpartProjector::Linear) {
                zr = matmul(bc.normed_r, blk.proj_r);
                zi = matmul(bc.normed_i, blk.proj_i);
            }
            bc.z = hcat(zr, zi);
            matmul(bc.z, blk.ffn_w1, bc.u);
            kernels::add_row_broadcast(bc.u, blk.ffn_b1);
            bc.act = bc.u;
            for (double& v : bc.act.a) v = kernels::silu(v);
            Mat f = matmul(bc.act, blk.ffn_w2);
            kernels::add_row_broadcast(f, blk.ffn_b2);
            kernels::add_inplace(h_r, cols(f, 0, cfg.width));
            kernels::add_inplace(h_i, cols(f, cfg.width, cfg.width));
        } else {
            bc.z = Mat(); // unused in the decoupled variant
            matmul(bc.normed_r, blk.ffn_r_w1, bc.u_r);
            kernels::add_row_broadcast(bc.u_r, blk.ffn_r_b1);
            bc.act_r = bc.u_r;
            for (double& v : bc.act_r.a) v = kernels::silu(v);
            Mat f_r = matmul(bc.act_r, blk.ffn_r_w2);
            kernels::add_row_broadcast(f_r, blk.ffn_r_b2);
            kernels::add_inplace(h_r, f_r);

            matmul(bc.normed_i, blk.ffn_i_w1, bc.u_i);
            kernels::add_row_broadcast(bc.u_i, blk.ffn_i_b1);
            bc.act_i = bc.u_i;
            for (double& v : bc.act_i.a) v = kernels::silu(v);
            Mat f_i = matmul(bc.act_i, blk.ffn_i_w2);
            kernels::add_row_broadcast(f_i, blk.ffn_i_b2);
            kernels::add_inplace(h_i, f_i);
        }
    }

    cc.final_r = h_r;
    cc.final_i = h_i;
    cc.valid = true;

    DenoiserOutput out;
    out.eps_r = matmul(h_r, params.head_w_r);
    kernels::add_row_broadcast(out.eps_r, params.head_b_r);
    out.eps_i = matmul(h_i, params.head_w_i);
    kernels::add_row_broadcast(out.eps_i, params.head_b_i);
    return out;
}

GradientBundle denoiser_backward(const DenoiserParams& params, const DenoiserCache& cache,
                                 const Mat& grad_eps_r, const Mat& grad_eps_i) {
    if (!cache.valid)
        throw std::runtime_error("denoiser_backward: no cached activations; run forward first");
    const auto& cfg = params.config;
    GradientBundle g = zeros_like(params);

    // Heads.
    kernels::add_inplace(g.head_w_r, matmul_at_b(cache.final_r, grad_eps_r));
    kernels::add_inplace(g.head_b_r, colsum(grad_eps_r));
    kernels::add_inplace(g.head_w_i, matmul_at_b(cache.final_i, grad_eps_i));
    kernels::add_inplace(g.head_b_i, colsum(grad_eps_i));
    Mat dh_r = matmul_a_bt(grad_eps_r, params.head_w_r);
    Mat dh_i = matmul_a_bt(grad_eps_i, params.head_w_i);

    for (int b = cfg.blocks - 1; b >= 0; --b) {
        const BlockParams& blk = params.blocks[b];
        const BlockCache& bc = cache.blocks[b];
        BlockParams& gb = g.blocks[b];

        // Feed-forward sublayer backward.
        if (cfg.coupling == BranchCoupling::Interactive) {
            const Mat df = hcat(dh_r, dh_i);
            kernels::add_inplace(gb.ffn_w2, matmul_at_b(bc.act, df));
            kernels::add_inplace(gb.ffn_b2, colsum(df));
            Mat dact = matmul_a_bt(df, blk.ffn_w2);
            Mat du = dact;
            for (size_t i = 0; i < du.a.size(); ++i)
                du.a[i] *= kernels::silu_grad(bc.u.a[i]);
            kernels::add_inplace(gb.ffn_w1, matmul_at_b(bc.z, du));
            kernels::add_inplace(gb.ffn_b1, colsum(du));
            const Mat dz = matmul_a_bt(du, blk.ffn_w1);
            Mat dzr = cols(dz, 0, cfg.width);
            Mat dzi = cols(dz, cfg.width, cfg.width);
            Mat dm_r, dm_i;
            if (cfg.projector == CounterpartProjector::Linear) {
                kernels::add_inplace(gb.proj_r, matmul_at_b(bc.normed_r, dzr));
                kernels::add_inplace(gb.proj_i, matmul_at_b(bc.normed_i, dzi));
                dm_r = matmul_a_bt(dzr, blk.proj_r);
                dm_i = matmul_a_bt(dzi, blk.proj_i);
            } else {
                dm_r = std::move(dzr);
                dm_i = std::move(dzi);
            }
            kernels::add_inplace(
                dh_r, ln_backward(dm_r, blk.real.ln2_g, bc.ln2_r, gb.real.ln2_g, gb.real.ln2_b));
            kernels::add_inplace(
                dh_i, ln_backward(dm_i, blk.imag.ln2_g, bc.ln2_i, gb.imag.ln2_g, gb.imag.ln2_b));
        } else {
            kernels::add_inplace(gb.ffn_r_w2, matmul_at_b(bc.act_r, dh_r));
            kernels::add_inplace(gb.ffn_r_b2, colsum(dh_r));
            Mat du_r = matmul_a_bt(dh_r, blk.ffn_r_w2);
            for (size_t i = 0; i < du_r.a.size(); ++i)
                du_r.a[i] *= kernels::silu_grad(bc.u_r.a[i]);
            kernels::add_inplace(gb.ffn_r_w1, matmul_at_b(bc.normed_r, du_r));
            kernels::add_inplace(gb.ffn_r_b1, colsum(du_r));
            Mat dm_r = matmul_a_bt(du_r, blk.ffn_r_w1);
            kernels::add_inplace(
                dh_r, ln_backward(dm_r, blk.real.ln2_g, bc.ln2_r, gb.real.ln2_g, gb.real.ln2_b));

            kernels::add_inplace(gb.ffn_i_w2, matmul_at_b(bc.act_i, dh_i));
            kernels::add_inplace(gb.ffn_i_b2, colsum(dh_i));
            Mat du_i = matmul_a_bt(dh_i, blk.ffn_i_w2);
            for (size_t i = 0; i < du_i.a.size(); ++i)
                du_i.a[i] *= kernels::silu_grad(bc.u_i.a[i]);
            kernels::add_inplace(gb.ffn_i_w1, matmul_at_b(bc.normed_i, du_i));
            kernels::add_inplace(gb.ffn_i_b1, colsum(du_i));
            Mat dm_i = matmul_a_bt(du_i, blk.ffn_i_w1);
            kernels::add_inplace(
                dh_i, ln_backward(dm_i, blk.imag.ln2_g, bc.ln2_i, gb.imag.ln2_g, gb.imag.ln2_b));
        }

        // Attention sublayer backward.
        Mat dn_r = attn_backward(dh_r, blk.real, bc.attn_r, cfg.heads, gb.real.wq, gb.real.wk,
                                 gb.real.wv, gb.real.wo);
        kernels::add_inplace(
            dh_r, ln_backward(dn_r, blk.real.ln1_g, bc.ln1_r, gb.real.ln1_g, gb.real.ln1_b));
        Mat dn_i = attn_backward(dh_i, blk.imag, bc.attn_i, cfg.heads, gb.imag.wq, gb.imag.wk,
                                 gb.imag.wv, gb.imag.wo);
        kernels::add_inplace(
            dh_i, ln_backward(dn_i, blk.imag.ln1_g, bc.ln1_i, gb.imag.ln1_g, gb.imag.ln1_b));
    }

    // Input projections.
    kernels::add_inplace(g.in_w_r, matmul_at_b(cache.in_r, dh_r));
    kernels::add_inplace(g.in_b_r, colsum(dh_r));
    kernels::add_inplace(g.in_w_i, matmul_at_b(cache.in_i, dh_i));
    kernels::add_inplace(g.in_b_i, colsum(dh_i));

    // Time MLP: its output was broadcast onto every token of both branches.
    Mat dtemb = colsum(dh_r);
    kernels::add_inplace(dtemb, colsum(dh_i));
    kernels::add_inplace(g.time_w2, matmul_at_b(cache.t_act, dtemb));
    kernels::add_inplace(g.time_b2, dtemb);
    Mat dt_act = matmul_a_bt(dtemb, params.time_w2);
    for (size_t i = 0; i < dt_act.a.size(); ++i)
        dt_act.a[i] *= kernels::silu_grad(cache.t_u.a[i]);
    kernels::add_inplace(g.time_w1, matmul_at_b(cache.t_raw, dt_act));
    kernels::add_inplace(g.time_b1, dt_act);

    return g;
}

} // namespace pacodi
