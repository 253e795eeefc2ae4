#pragma once

#include "pacodi/config.hpp"
#include "pacodi/dataset.hpp"
#include "pacodi/objective.hpp"

#include <string>

namespace pacodi {

// Self-contained training state: reloading continues bit-compatibly on the
// same platform. Binary layout: magic + version, a text manifest carrying
// the full configuration, little-endian length-prefixed named tensor records
// for parameters and optimizer moments, the RNG state, the step counter and
// the normalization record.
struct Checkpoint {
    static constexpr std::uint32_t kVersion = 1;

    PipelineConfig config;
    DenoiserParams params;
    AdamState adam;
    Rng::State rng_state{};
    long train_step = 0;
    NormalizationRecord norm;
};

// Atomic: writes to path + ".tmp" then renames.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

} // namespace pacodi
