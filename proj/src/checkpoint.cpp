#include "pacodi/checkpoint.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace pacodi {

namespace {

constexpr char kMagic[8] = {'P', 'A', 'C', 'O', 'D', 'I', 'C', 'K'};

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_f64(std::ostream& out, double v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_bytes(std::ostream& out, const std::string& s) {
    write_u64(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
double read_f64(std::istream& in) {
    double v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
std::string read_bytes(std::istream& in) {
    const std::uint64_t n = read_u64(in);
    std::string s(n, '\0');
    in.read(s.data(), static_cast<std::streamsize>(n));
    return s;
}

void write_named_tensors(std::ostream& out, const DenoiserParams& bundle) {
    std::uint64_t count = 0;
    bundle.for_each_tensor([&](const std::string&, const Mat&) { ++count; });
    write_u64(out, count);
    bundle.for_each_tensor([&](const std::string& name, const Mat& m) {
        write_bytes(out, name);
        write_u32(out, static_cast<std::uint32_t>(m.rows));
        write_u32(out, static_cast<std::uint32_t>(m.cols));
        out.write(reinterpret_cast<const char*>(m.a.data()),
                  static_cast<std::streamsize>(m.a.size() * sizeof(double)));
    });
}

void read_named_tensors(std::istream& in, DenoiserParams& bundle) {
    const std::uint64_t count = read_u64(in);
    std::uint64_t expected = 0;
    bundle.for_each_tensor([&](const std::string&, Mat&) { ++expected; });
    if (count != expected)
        throw FormError("checkpoint: tensor count does not match the configured model");
    bundle.for_each_tensor([&](const std::string& name, Mat& m) {
        const std::string stored = read_bytes(in);
        if (stored != name)
            throw FormError("checkpoint: tensor '" + stored + "' where '" + name +
                            "' was expected");
        const std::uint32_t rows = read_u32(in);
        const std::uint32_t cols = read_u32(in);
        if (static_cast<int>(rows) != m.rows || static_cast<int>(cols) != m.cols)
            throw FormError("checkpoint: tensor '" + name + "' has unexpected shape");
        in.read(reinterpret_cast<char*>(m.a.data()),
                static_cast<std::streamsize>(m.a.size() * sizeof(double)));
    });
}

} // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw InvalidInputError("checkpoint: cannot open '" + tmp + "' for writing");
        out.write(kMagic, sizeof kMagic);
        write_u32(out, Checkpoint::kVersion);
        write_bytes(out, ckpt.config.to_text());

        write_named_tensors(out, ckpt.params);
        write_named_tensors(out, ckpt.adam.m);
        write_named_tensors(out, ckpt.adam.v);
        write_u64(out, static_cast<std::uint64_t>(ckpt.adam.step));
        write_u64(out, static_cast<std::uint64_t>(ckpt.train_step));

        write_u64(out, ckpt.rng_state.base_seed);
        for (std::uint64_t w : ckpt.rng_state.s) write_u64(out, w);
        write_u32(out, ckpt.rng_state.has_cached ? 1 : 0);
        write_f64(out, ckpt.rng_state.cached);

        const auto& norm = ckpt.norm;
        write_u64(out, norm.channel_mean.size());
        for (double v : norm.channel_mean) write_f64(out, v);
        for (double v : norm.channel_std) write_f64(out, v);
        for (bool b : norm.std_floored) write_u32(out, b ? 1 : 0);
        write_u32(out, static_cast<std::uint32_t>(norm.sample_means.rows));
        write_u32(out, static_cast<std::uint32_t>(norm.sample_means.cols));
        out.write(reinterpret_cast<const char*>(norm.sample_means.a.data()),
                  static_cast<std::streamsize>(norm.sample_means.a.size() * sizeof(double)));
        write_u32(out, norm.per_sample_centering ? 1 : 0);
        if (!out) throw std::runtime_error("checkpoint: write failed for '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("checkpoint: rename failed: " +
                                 std::string(std::strerror(errno)));
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInputError("checkpoint: cannot open '" + path + "'");
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw FormError("checkpoint: bad magic in '" + path + "'");
    const std::uint32_t version = read_u32(in);
    if (version != Checkpoint::kVersion)
        throw FormError("checkpoint: unsupported format version");

    Checkpoint ckpt;
    ckpt.config = PipelineConfig::from_text(read_bytes(in));

    // Allocate the parameter layout from the manifest, then fill tensors.
    Rng throwaway(0);
    ckpt.params = init_params(ckpt.config.denoiser_config(), throwaway);
    ckpt.adam = make_adam_state(ckpt.params);
    read_named_tensors(in, ckpt.params);
    read_named_tensors(in, ckpt.adam.m);
    read_named_tensors(in, ckpt.adam.v);
    ckpt.adam.step = static_cast<long>(read_u64(in));
    ckpt.train_step = static_cast<long>(read_u64(in));

    ckpt.rng_state.base_seed = read_u64(in);
    for (auto& w : ckpt.rng_state.s) w = read_u64(in);
    ckpt.rng_state.has_cached = read_u32(in) != 0;
    ckpt.rng_state.cached = read_f64(in);

    const std::uint64_t d = read_u64(in);
    ckpt.norm.channel_mean.resize(d);
    ckpt.norm.channel_std.resize(d);
    ckpt.norm.std_floored.resize(d);
    for (auto& v : ckpt.norm.channel_mean) v = read_f64(in);
    for (auto& v : ckpt.norm.channel_std) v = read_f64(in);
    for (std::uint64_t i = 0; i < d; ++i) ckpt.norm.std_floored[i] = read_u32(in) != 0;
    const std::uint32_t rows = read_u32(in);
    const std::uint32_t cols = read_u32(in);
    ckpt.norm.sample_means = Mat(static_cast<int>(rows), static_cast<int>(cols));
    in.read(reinterpret_cast<char*>(ckpt.norm.sample_means.a.data()),
            static_cast<std::streamsize>(ckpt.norm.sample_means.a.size() * sizeof(double)));
    ckpt.norm.per_sample_centering = read_u32(in) != 0;

    if (!in) throw FormError("checkpoint: truncated file '" + path + "'");
    return ckpt;
}

} // namespace pacodi
