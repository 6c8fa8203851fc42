#include "nldst/decoding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nldst/rng.hpp"

namespace nldst {

void DecodeConfig::check() const {
    if (beam_width < 1) throw std::invalid_argument("beam_width must be >= 1");
    if (!(nucleus_p > 0.0) || nucleus_p > 1.0)
        throw std::invalid_argument("nucleus_p must be in (0, 1]");
    if (max_len < 1) throw std::invalid_argument("max_len must be >= 1");
    if (length_penalty < 0) throw std::invalid_argument("length_penalty must be >= 0");
}

std::vector<double> masked_step_distribution(const ConditionalSequenceModel& model,
                                             std::span<const TokenId> condition,
                                             std::span<const TokenId> prefix) {
    std::vector<double> p = model.next_token_distribution(condition, prefix);
    const Vocabulary& vocab = model.vocab();
    double kept = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        if (vocab.is_masked_marker(static_cast<TokenId>(i))) p[i] = 0.0;
        kept += p[i];
    }
    if (kept <= 0.0) throw std::invalid_argument("model puts all mass on marker tokens");
    for (double& x : p) x /= kept;
    return p;
}

namespace {

NLStateDescription ids_to_tokens(const std::vector<TokenId>& ids, const Vocabulary& vocab) {
    NLStateDescription out;
    for (TokenId id : ids) out.push_back(vocab.token(id));
    return out;
}

DecodeResult make_result(const std::vector<TokenId>& ids, double logp, TerminationReason reason,
                         const Vocabulary& vocab) {
    DecodeResult r;
    r.token_ids = ids;
    r.tokens = ids_to_tokens(ids, vocab);
    r.log_probability = logp;
    r.terminated_by = reason;
    return r;
}

}  // namespace

DecodeResult decode_greedy(const ConditionalSequenceModel& model,
                           const std::vector<TokenId>& condition, const DecodeConfig& config) {
    config.check();
    std::vector<TokenId> out;
    double logp = 0.0;
    while (true) {
        std::vector<double> p = masked_step_distribution(model, condition, out);
        TokenId best = 0;
        for (size_t i = 1; i < p.size(); ++i)
            if (p[i] > p[static_cast<size_t>(best)]) best = static_cast<TokenId>(i);
        logp += std::log(p[static_cast<size_t>(best)]);
        if (best == Vocabulary::kEos)
            return make_result(out, logp, TerminationReason::eos, model.vocab());
        out.push_back(best);
        if (static_cast<int>(out.size()) >= config.max_len)
            return make_result(out, logp, TerminationReason::max_len, model.vocab());
    }
}

namespace {

struct Hypothesis {
    std::vector<TokenId> ids;
    double logp = 0.0;
    bool finished = false;  // ended with EOS

    // higher logp first, ties by lexicographically smaller id sequence
    bool better_than(const Hypothesis& other) const {
        if (logp != other.logp) return logp > other.logp;
        return ids < other.ids;
    }
};

}  // namespace

DecodeResult decode_beam(const ConditionalSequenceModel& model,
                         const std::vector<TokenId>& condition, const DecodeConfig& config) {
    config.check();
    std::vector<Hypothesis> alive{{{}, 0.0, false}};
    std::vector<Hypothesis> pool;

    for (int step = 0; step < config.max_len + 1 && !alive.empty(); ++step) {
        std::vector<Hypothesis> expanded;
        for (const Hypothesis& h : alive) {
            std::vector<double> p = masked_step_distribution(model, condition, h.ids);
            for (size_t tok = 0; tok < p.size(); ++tok) {
                if (p[tok] <= 0.0) continue;
                Hypothesis next = h;
                next.logp += std::log(p[tok]);
                if (static_cast<TokenId>(tok) == Vocabulary::kEos) {
                    next.finished = true;
                } else {
                    next.ids.push_back(static_cast<TokenId>(tok));
                }
                expanded.push_back(std::move(next));
            }
        }
        // EOS extensions compete for beam slots like any other, then the
        // surviving finished ones retire; this makes width 1 degenerate to
        // greedy while a wide enough beam still covers every sequence
        std::sort(expanded.begin(), expanded.end(),
                  [](const Hypothesis& a, const Hypothesis& b) { return a.better_than(b); });
        if (static_cast<int>(expanded.size()) > config.beam_width)
            expanded.resize(static_cast<size_t>(config.beam_width));
        std::erase_if(expanded, [&](Hypothesis& h) {
            if (!h.finished) return false;
            pool.push_back(std::move(h));
            return true;
        });
        if (!expanded.empty() && static_cast<int>(expanded.front().ids.size()) >= config.max_len) {
            // length limit reached, survivors retire unfinished
            for (Hypothesis& h : expanded) pool.push_back(std::move(h));
            expanded.clear();
        }
        alive = std::move(expanded);
    }

    if (pool.empty()) throw std::logic_error("beam search produced no hypotheses");
    auto score = [&](const Hypothesis& h) {
        // generated steps including EOS, so empty outputs stay rankable
        double len = static_cast<double>(h.ids.size() + (h.finished ? 1 : 0));
        if (len < 1.0) len = 1.0;
        return h.logp / std::pow(len, config.length_penalty);
    };
    const Hypothesis* best = &pool.front();
    for (const Hypothesis& h : pool) {
        double sh = score(h), sb = score(*best);
        if (sh > sb || (sh == sb && h.ids < best->ids)) best = &h;
    }
    return make_result(best->ids, best->logp,
                       best->finished ? TerminationReason::eos : TerminationReason::max_len,
                       model.vocab());
}

std::pair<std::vector<TokenId>, std::vector<double>> nucleus_of(const std::vector<double>& p,
                                                                double nucleus_p) {
    std::vector<TokenId> order(p.size());
    for (size_t i = 0; i < p.size(); ++i) order[i] = static_cast<TokenId>(i);
    std::sort(order.begin(), order.end(), [&](TokenId a, TokenId b) {
        if (p[static_cast<size_t>(a)] != p[static_cast<size_t>(b)])
            return p[static_cast<size_t>(a)] > p[static_cast<size_t>(b)];
        return a < b;
    });
    std::vector<TokenId> chosen;
    double mass = 0.0;
    for (TokenId id : order) {
        if (p[static_cast<size_t>(id)] <= 0.0) break;
        chosen.push_back(id);
        mass += p[static_cast<size_t>(id)];
        if (mass >= nucleus_p - 1e-12) break;  // crossing token included
    }
    std::vector<double> renorm;
    for (TokenId id : chosen) renorm.push_back(p[static_cast<size_t>(id)] / mass);
    return {chosen, renorm};
}

DecodeResult decode_nucleus(const ConditionalSequenceModel& model,
                            const std::vector<TokenId>& condition, const DecodeConfig& config) {
    config.check();
    Rng rng(config.seed);
    std::vector<TokenId> out;
    double logp = 0.0;
    while (true) {
        std::vector<double> p = masked_step_distribution(model, condition, out);
        auto [chosen, renorm] = nucleus_of(p, config.nucleus_p);
        double r = rng.uniform();
        size_t pick = chosen.size() - 1;
        double cum = 0.0;
        for (size_t i = 0; i < chosen.size(); ++i) {
            cum += renorm[i];
            if (r < cum) {
                pick = i;
                break;
            }
        }
        TokenId tok = chosen[pick];
        logp += std::log(p[static_cast<size_t>(tok)]);
        if (tok == Vocabulary::kEos)
            return make_result(out, logp, TerminationReason::eos, model.vocab());
        out.push_back(tok);
        if (static_cast<int>(out.size()) >= config.max_len)
            return make_result(out, logp, TerminationReason::max_len, model.vocab());
    }
}

DecodeResult decode(const ConditionalSequenceModel& model, const DialogueHistory& condition,
                    const DecodeConfig& config) {
    std::vector<TokenId> prompt = encode_prompt(condition, model.vocab());
    DecodeConfig cfg = config;
    // per-turn stream so parallel and serial evaluation runs agree
    cfg.seed = hash_combine(hash_combine(config.seed, fnv1a64(condition.dialogue_id)),
                            static_cast<uint64_t>(condition.turns.empty()
                                                      ? 0
                                                      : condition.turns.back().turn_index));
    switch (config.strategy) {
        case DecodeStrategy::greedy: return decode_greedy(model, prompt, cfg);
        case DecodeStrategy::beam: return decode_beam(model, prompt, cfg);
        case DecodeStrategy::nucleus: return decode_nucleus(model, prompt, cfg);
    }
    throw std::logic_error("unknown decode strategy");
}

}  // namespace nldst
