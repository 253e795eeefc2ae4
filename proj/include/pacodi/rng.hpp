#pragma once

#include <array>
#include <cstdint>

namespace pacodi {

// Deterministic, splittable random generator (xoshiro256++ seeded via
// splitmix64). Streams derived with split(i) depend only on the construction
// seed and the stream index, so work distributed over samples/chunks produces
// identical results for any thread count or schedule.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi);

    // Standard normal via Box-Muller (pairs cached).
    double normal();

    // Independent stream derived from the construction seed, not the current
    // state: split(i) is the same no matter how much this generator has been
    // consumed. Splitting rule: child_seed = mix(base_seed, stream_index).
    Rng split(std::uint64_t stream) const;

    std::uint64_t base_seed() const { return base_seed_; }

    // Raw state access for checkpointing.
    struct State {
        std::uint64_t base_seed;
        std::array<std::uint64_t, 4> s;
        bool has_cached;
        double cached;
    };
    State save() const;
    static Rng restore(const State& st);

private:
    Rng() = default;

    std::uint64_t base_seed_ = 0;
    std::array<std::uint64_t, 4> s_{};
    bool has_cached_ = false;
    double cached_ = 0.0;
};

// splitmix64 step, exposed for seed-derivation rules elsewhere.
std::uint64_t splitmix64(std::uint64_t& x);

// One-shot mixing of (seed, stream) into a child seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

} // namespace pacodi
