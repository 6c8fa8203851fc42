#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nldst/types.hpp"

namespace nldst {

struct NoiseConfig {
    double rate = 0.0;                 // in [0, 1]
    std::vector<Token> pool;           // replacement tokens, markers excluded
    uint64_t seed = 0;

    void check() const;
};

// Each token of a user turn is independently replaced with probability
// `rate` by a uniform draw from the pool; system turns pass through
// untouched. Deterministic per (seed, dialogue_id, turn_index, position)
// and token count preserving.
Turn inject_noise(const Turn& turn, const std::string& dialogue_id, const NoiseConfig& config);

// Applies inject_noise to every user turn of every example history.
Corpus inject_noise_corpus(const Corpus& corpus, const NoiseConfig& config);

}  // namespace nldst
