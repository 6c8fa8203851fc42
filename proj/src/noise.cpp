#include "nldst/noise.hpp"

#include <stdexcept>

#include "nldst/rng.hpp"

namespace nldst {

void NoiseConfig::check() const {
    if (rate < 0.0 || rate > 1.0) throw std::invalid_argument("noise rate must be in [0, 1]");
    if (rate > 0.0 && pool.empty())
        throw std::invalid_argument("replacement pool must be non-empty when rate > 0");
}

Turn inject_noise(const Turn& turn, const std::string& dialogue_id, const NoiseConfig& config) {
    config.check();
    if (turn.speaker != Speaker::user || config.rate == 0.0) return turn;
    Turn out = turn;
    for (size_t i = 0; i < out.utterance.size(); ++i) {
        Rng rng = position_rng(config.seed, dialogue_id, turn.turn_index, static_cast<int>(i));
        if (rng.uniform() < config.rate)
            out.utterance[i] = config.pool[rng.below(config.pool.size())];
    }
    return out;
}

Corpus inject_noise_corpus(const Corpus& corpus, const NoiseConfig& config) {
    config.check();
    Corpus out = corpus;
    for (auto& ex : out.examples)
        for (Turn& t : ex.history.turns)
            t = inject_noise(t, ex.history.dialogue_id, config);
    return out;
}

}  // namespace nldst
