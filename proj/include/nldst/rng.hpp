#pragma once

#include <cstdint>
#include <string>

namespace nldst {

uint64_t fnv1a64(const std::string& data);
uint64_t hash_combine(uint64_t a, uint64_t b);

// Deterministic splitmix64 stream; used everywhere portability of the draw
// sequence matters (std::shuffle and std::uniform_*_distribution are
// implementation-defined).
class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next();
    double uniform();              // [0, 1)
    size_t below(size_t n);        // [0, n)

  private:
    uint64_t state_;
};

// Stream keyed by (seed, dialogue_id, turn_index[, position]) so parallel
// and serial evaluation draw identical values per turn.
Rng turn_rng(uint64_t seed, const std::string& dialogue_id, int turn_index);
Rng position_rng(uint64_t seed, const std::string& dialogue_id, int turn_index, int position);

}  // namespace nldst
