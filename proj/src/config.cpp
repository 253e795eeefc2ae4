#include "pacodi/config.hpp"

#include <fstream>
#include <sstream>

namespace pacodi {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    size_t e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

} // namespace

ConfigMap ConfigMap::parse_text(const std::string& text) {
    ConfigMap map;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const size_t eq = t.find('=');
        if (eq == std::string::npos) {
            std::ostringstream oss;
            oss << "config: line " << line_no << ": expected key=value, got '" << t << "'";
            throw InvalidInputError(oss.str());
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            std::ostringstream oss;
            oss << "config: line " << line_no << ": empty key";
            throw InvalidInputError(oss.str());
        }
        map.kv_[key] = value;
    }
    return map;
}

ConfigMap ConfigMap::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("config: cannot open '" + path + "'");
    std::ostringstream oss;
    oss << in.rdbuf();
    return parse_text(oss.str());
}

bool ConfigMap::has(const std::string& key) const { return kv_.count(key) > 0; }

std::string ConfigMap::get_string(const std::string& key, const std::string& fallback) const {
    touched_[key] = true;
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

long ConfigMap::get_int(const std::string& key, long fallback) const {
    touched_[key] = true;
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
        size_t pos = 0;
        const long v = std::stol(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw InvalidInputError("config: key '" + key + "' expects an integer, got '" +
                                it->second + "'");
    }
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
    touched_[key] = true;
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
        size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw InvalidInputError("config: key '" + key + "' expects a number, got '" +
                                it->second + "'");
    }
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
    touched_[key] = true;
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw InvalidInputError("config: key '" + key + "' expects true/false, got '" + it->second +
                            "'");
}

DenoiserConfig PipelineConfig::denoiser_config() const {
    DenoiserConfig cfg;
    cfg.tokens = compressed_bins(length);
    cfg.channels = channels;
    cfg.width = width;
    cfg.heads = heads;
    cfg.blocks = blocks;
    cfg.time_embed_dim = time_embed_dim;
    cfg.coupling = coupling;
    cfg.projector = projector;
    return cfg;
}

SamplerConfig PipelineConfig::sampler_config() const {
    SamplerConfig sc;
    sc.kind = sampler_kind;
    sc.sde_steps = sde_steps > 0 ? sde_steps : schedule_steps;
    sc.sde_score_factor = sde_score_factor;
    sc.final_denoise = final_denoise;
    return sc;
}

std::string PipelineConfig::to_text() const {
    std::ostringstream o;
    o.precision(17);
    o << "data.kind=" << data_kind << "\n";
    if (!data_path.empty()) o << "data.path=" << data_path << "\n";
    o << "data.n=" << data_n << "\n";
    o << "data.length=" << length << "\n";
    o << "data.channels=" << channels << "\n";
    o << "data.tone_bin=" << tone_bin << "\n";
    o << "data.stride=" << stride << "\n";
    o << "data.header=" << (csv_header ? "true" : "false") << "\n";
    o << "data.seed=" << data_seed << "\n";
    o << "model.width=" << width << "\n";
    o << "model.heads=" << heads << "\n";
    o << "model.blocks=" << blocks << "\n";
    o << "model.time_embed_dim=" << time_embed_dim << "\n";
    o << "model.coupling="
      << (coupling == BranchCoupling::Interactive ? "interactive" : "decoupled") << "\n";
    o << "model.projector="
      << (projector == CounterpartProjector::Identity ? "identity" : "linear") << "\n";
    o << "schedule.kind=" << (schedule_kind == ScheduleKind::Linear ? "linear" : "cosine")
      << "\n";
    o << "schedule.T=" << schedule_steps << "\n";
    o << "schedule.beta_min=" << beta_min << "\n";
    o << "schedule.beta_max=" << beta_max << "\n";
    o << "schedule.weighting=" << (weighting == WeightingMode::Elbo ? "elbo" : "simple") << "\n";
    o << "schedule.sigma=" << sigma << "\n";
    o << "train.steps=" << train_steps << "\n";
    o << "train.batch=" << batch_size << "\n";
    o << "train.lr=" << lr << "\n";
    o << "train.seed=" << seed << "\n";
    o << "train.checkpoint_every=" << checkpoint_every << "\n";
    o << "train.log_every=" << log_every << "\n";
    o << "train.out=" << out_path << "\n";
    o << "sampler.kind=" << (sampler_kind == SamplerKind::Ddpm ? "ddpm" : "sde") << "\n";
    o << "sampler.sde_steps=" << sde_steps << "\n";
    o << "sampler.score_factor="
      << (sde_score_factor == SdeScoreFactor::One ? "one" : "half") << "\n";
    o << "sampler.final_denoise=" << (final_denoise ? "true" : "false") << "\n";
    return o.str();
}

PipelineConfig PipelineConfig::from_map(const ConfigMap& map) {
    PipelineConfig c;
    c.data_kind = map.get_string("data.kind", c.data_kind);
    c.data_path = map.get_string("data.path", c.data_path);
    c.data_n = static_cast<int>(map.get_int("data.n", c.data_n));
    c.length = static_cast<int>(map.get_int("data.length", c.length));
    c.channels = static_cast<int>(map.get_int("data.channels", c.channels));
    c.tone_bin = static_cast<int>(map.get_int("data.tone_bin", c.tone_bin));
    c.stride = static_cast<int>(map.get_int("data.stride", c.stride));
    c.csv_header = map.get_bool("data.header", c.csv_header);
    c.data_seed = static_cast<std::uint64_t>(map.get_int("data.seed", long(c.data_seed)));

    c.width = static_cast<int>(map.get_int("model.width", c.width));
    c.heads = static_cast<int>(map.get_int("model.heads", c.heads));
    c.blocks = static_cast<int>(map.get_int("model.blocks", c.blocks));
    c.time_embed_dim = static_cast<int>(map.get_int("model.time_embed_dim", c.time_embed_dim));
    {
        const std::string coupling = map.get_string("model.coupling", "interactive");
        if (coupling == "interactive")
            c.coupling = BranchCoupling::Interactive;
        else if (coupling == "decoupled")
            c.coupling = BranchCoupling::Decoupled;
        else
            throw InvalidInputError("config: model.coupling must be interactive|decoupled");
        const std::string projector = map.get_string("model.projector", "identity");
        if (projector == "identity")
            c.projector = CounterpartProjector::Identity;
        else if (projector == "linear")
            c.projector = CounterpartProjector::Linear;
        else
            throw InvalidInputError("config: model.projector must be identity|linear");
    }

    c.schedule_kind = schedule_kind_from_string(map.get_string("schedule.kind", "linear"));
    c.schedule_steps = static_cast<int>(map.get_int("schedule.T", c.schedule_steps));
    c.beta_min = map.get_double("schedule.beta_min", c.beta_min);
    c.beta_max = map.get_double("schedule.beta_max", c.beta_max);
    c.weighting = weighting_mode_from_string(map.get_string("schedule.weighting", "simple"));
    c.sigma = map.get_double("schedule.sigma", c.sigma);

    c.train_steps = static_cast<int>(map.get_int("train.steps", c.train_steps));
    c.batch_size = static_cast<int>(map.get_int("train.batch", c.batch_size));
    c.lr = map.get_double("train.lr", c.lr);
    c.seed = static_cast<std::uint64_t>(map.get_int("train.seed", long(c.seed)));
    c.checkpoint_every =
        static_cast<int>(map.get_int("train.checkpoint_every", c.checkpoint_every));
    c.log_every = static_cast<int>(map.get_int("train.log_every", c.log_every));
    c.out_path = map.get_string("train.out", c.out_path);

    {
        const std::string kind = map.get_string("sampler.kind", "ddpm");
        if (kind == "ddpm")
            c.sampler_kind = SamplerKind::Ddpm;
        else if (kind == "sde")
            c.sampler_kind = SamplerKind::Sde;
        else
            throw InvalidInputError("config: sampler.kind must be ddpm|sde");
        c.sde_steps = static_cast<int>(map.get_int("sampler.sde_steps", c.sde_steps));
        const std::string factor = map.get_string("sampler.score_factor", "one");
        if (factor == "one")
            c.sde_score_factor = SdeScoreFactor::One;
        else if (factor == "half")
            c.sde_score_factor = SdeScoreFactor::Half;
        else
            throw InvalidInputError("config: sampler.score_factor must be one|half");
        c.final_denoise = map.get_bool("sampler.final_denoise", c.final_denoise);
    }

    // Reject unknown keys so misspellings cannot silently fall back.
    for (const auto& [key, value] : map.entries())
        if (!map.touched().count(key))
            throw InvalidInputError("config: unknown key '" + key + "'");

    // Early validation of the pieces train() would otherwise hit mid-run.
    if (c.schedule_steps < 1) throw InvalidInputError("config: schedule.T must be >= 1");
    if (c.length < 2) throw InvalidInputError("config: data.length must be >= 2");
    if (c.batch_size < 1) throw InvalidInputError("config: train.batch must be >= 1");
    if (c.train_steps < 0) throw InvalidInputError("config: train.steps must be >= 0");
    return c;
}

PipelineConfig PipelineConfig::from_text(const std::string& text) {
    return from_map(ConfigMap::parse_text(text));
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
    return from_map(ConfigMap::parse_file(path));
}

} // namespace pacodi
