#include "nldst/rng.hpp"

#include <cmath>

namespace nldst {

uint64_t fnv1a64(const std::string& data) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

uint64_t hash_combine(uint64_t a, uint64_t b) {
    a ^= b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2);
    return a;
}

uint64_t Rng::next() {
    // splitmix64
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

size_t Rng::below(size_t n) {
    if (n == 0) return 0;
    // rejection sampling to avoid modulo bias
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v;
    do {
        v = next();
    } while (v >= limit);
    return static_cast<size_t>(v % n);
}

Rng turn_rng(uint64_t seed, const std::string& dialogue_id, int turn_index) {
    uint64_t h = hash_combine(seed, fnv1a64(dialogue_id));
    h = hash_combine(h, static_cast<uint64_t>(turn_index) + 1);
    return Rng(h);
}

Rng position_rng(uint64_t seed, const std::string& dialogue_id, int turn_index, int position) {
    uint64_t h = hash_combine(seed, fnv1a64(dialogue_id));
    h = hash_combine(h, static_cast<uint64_t>(turn_index) + 1);
    h = hash_combine(h, static_cast<uint64_t>(position) + 1);
    return Rng(h);
}

}  // namespace nldst
