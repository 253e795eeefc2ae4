#pragma once

#include "pacodi/denoiser.hpp"
#include "pacodi/diffusion_schedule.hpp"
#include "pacodi/reverse_sampler.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace pacodi {

// Flat key=value configuration text: one pair per line, '#' comments,
// whitespace trimmed. Unknown keys are rejected so typos fail loudly.
class ConfigMap {
public:
    static ConfigMap parse_text(const std::string& text);
    static ConfigMap parse_file(const std::string& path);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    long get_int(const std::string& key, long fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    // Keys looked up so far; used to reject unknown keys after assembly.
    const std::map<std::string, std::string>& entries() const { return kv_; }
    std::map<std::string, bool>& touched() const { return touched_; }

private:
    std::map<std::string, std::string> kv_;
    mutable std::map<std::string, bool> touched_;
};

// Everything the pipeline needs, with the engine defaults filled in.
struct PipelineConfig {
    // data.*
    std::string data_kind = "sines"; // sines | single-tone | csv | samples
    std::string data_path;
    int data_n = 10000;
    int length = 24;
    int channels = 5;
    int tone_bin = 4;
    int stride = 1;
    bool csv_header = false;
    std::uint64_t data_seed = 1;

    // model.*
    int width = 32;
    int heads = 4;
    int blocks = 2;
    int time_embed_dim = 32;
    BranchCoupling coupling = BranchCoupling::Interactive;
    CounterpartProjector projector = CounterpartProjector::Identity;

    // schedule.*
    ScheduleKind schedule_kind = ScheduleKind::Linear;
    int schedule_steps = 1000;
    double beta_min = 1e-4;
    double beta_max = 2e-2;
    WeightingMode weighting = WeightingMode::Simple;
    double sigma = 1.0;

    // train.*
    int train_steps = 500;
    int batch_size = 32;
    double lr = 1e-3;
    std::uint64_t seed = 7;
    int checkpoint_every = 0; // 0 = only final
    int log_every = 1;
    std::string out_path = "pacodi.ckpt";

    // sampler.*
    SamplerKind sampler_kind = SamplerKind::Ddpm;
    int sde_steps = 0; // 0 = schedule_steps
    SdeScoreFactor sde_score_factor = SdeScoreFactor::One;
    bool final_denoise = true;

    DenoiserConfig denoiser_config() const;
    SamplerConfig sampler_config() const;

    // Round-trips through the manifest text stored in checkpoints.
    std::string to_text() const;
    static PipelineConfig from_map(const ConfigMap& map);
    static PipelineConfig from_text(const std::string& text);
    static PipelineConfig from_file(const std::string& path);
};

} // namespace pacodi
