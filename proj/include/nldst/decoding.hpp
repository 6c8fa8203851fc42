#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nldst/lm.hpp"
#include "nldst/types.hpp"

namespace nldst {

enum class DecodeStrategy { greedy, beam, nucleus };

struct DecodeConfig {
    DecodeStrategy strategy = DecodeStrategy::greedy;
    int beam_width = 4;
    double nucleus_p = 0.9;
    int max_len = 64;
    uint64_t seed = 0;
    double length_penalty = 0.0;

    void check() const;
};

enum class TerminationReason { eos, max_len };

struct DecodeResult {
    NLStateDescription tokens;
    std::vector<TokenId> token_ids;
    double log_probability = 0.0;  // sum of chosen step log-probabilities
    TerminationReason terminated_by = TerminationReason::eos;
};

// Marker tokens (BOS, SEP, UNK and the tag tokens) are masked to zero
// probability and the distribution renormalized before every step; state
// descriptions are pure text.
std::vector<double> masked_step_distribution(const ConditionalSequenceModel& model,
                                             std::span<const TokenId> condition,
                                             std::span<const TokenId> prefix);

DecodeResult decode_greedy(const ConditionalSequenceModel& model,
                           const std::vector<TokenId>& condition, const DecodeConfig& config);

// Standard beam over summed log-probabilities; finished hypotheses retire
// into a pool and the final ranking divides by length^length_penalty.
// Width 1 reproduces greedy exactly; ties break by token id then
// lexicographic id sequence.
DecodeResult decode_beam(const ConditionalSequenceModel& model,
                         const std::vector<TokenId>& condition, const DecodeConfig& config);

// Per step: sort by descending probability (ties by token id), take the
// smallest prefix reaching cumulative mass p, renormalize, sample. Fully
// deterministic given the seed.
DecodeResult decode_nucleus(const ConditionalSequenceModel& model,
                            const std::vector<TokenId>& condition, const DecodeConfig& config);

DecodeResult decode(const ConditionalSequenceModel& model, const DialogueHistory& condition,
                    const DecodeConfig& config);

// nucleus selection helper, exposed for tests: indices into `p` forming the
// nucleus plus their renormalized probabilities
std::pair<std::vector<TokenId>, std::vector<double>> nucleus_of(const std::vector<double>& p,
                                                                double nucleus_p);

}  // namespace nldst
