#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nldst/types.hpp"

namespace nldst {

using TokenId = int;

// Dense token<->id bijection with reserved markers. Out-of-vocabulary
// tokens map to UNK. The speaker/state tags are ordinary vocabulary
// entries, listed as markers so decoders can mask them.
class Vocabulary {
  public:
    static constexpr TokenId kBos = 0;
    static constexpr TokenId kEos = 1;
    static constexpr TokenId kUnk = 2;
    static constexpr TokenId kSep = 3;
    static constexpr TokenId kUserTag = 4;
    static constexpr TokenId kSystemTag = 5;
    static constexpr TokenId kStateTag = 6;

    Vocabulary();

    TokenId add(const std::string& token);       // idempotent
    TokenId id(const std::string& token) const;  // kUnk when absent
    const std::string& token(TokenId id) const;
    size_t size() const { return id_to_token_.size(); }

    // markers never emitted as state-description text (EOS excluded: it is
    // the stop symbol, not text)
    bool is_masked_marker(TokenId id) const;

    static Vocabulary from_corpus(const Corpus& corpus);

    bool operator==(const Vocabulary&) const = default;

  private:
    std::map<std::string, TokenId> token_to_id_;
    std::vector<std::string> id_to_token_;
};

// Serializes a dialogue history into the conditioning prefix: per turn a
// speaker tag plus utterance tokens, turns joined by SEP, terminated by
// the "state:" tag.
std::vector<TokenId> encode_prompt(const DialogueHistory& history, const Vocabulary& vocab);

// Abstract next-token-distribution provider. Returned vectors are
// non-negative and sum to 1 within 1e-9.
class ConditionalSequenceModel {
  public:
    virtual ~ConditionalSequenceModel() = default;
    virtual const Vocabulary& vocab() const = 0;
    virtual std::vector<double> next_token_distribution(
        std::span<const TokenId> condition, std::span<const TokenId> prefix) const = 0;
};

// Interpolated count-based n-gram model over prompt+target windows, with a
// fixed smoothing floor of 1e-6/|V| folded in by renormalization so every
// token keeps strictly positive probability.
class NGramModel : public ConditionalSequenceModel {
  public:
    NGramModel(Vocabulary vocab, int order, std::vector<double> lambdas);

    const Vocabulary& vocab() const override { return vocab_; }
    int order() const { return order_; }
    const std::vector<double>& lambdas() const { return lambdas_; }

    std::vector<double> next_token_distribution(std::span<const TokenId> condition,
                                                std::span<const TokenId> prefix) const override;

    void save(const std::string& path) const;
    static NGramModel load_file(const std::string& path);

    // exposed for tests: count of token after context at a given order
    uint64_t count(int k, const std::vector<TokenId>& context, TokenId token) const;

    friend NGramModel fit(const Corpus& corpus, int order, const std::vector<double>& lambdas);

  private:
    struct ContextCounts {
        uint64_t total = 0;
        std::map<TokenId, uint64_t> by_token;
    };

    void accumulate(const std::vector<TokenId>& sequence, size_t first_predicted);

    Vocabulary vocab_;
    int order_;
    std::vector<double> lambdas_;
    // counts_[k-1]: context of k-1 tokens -> continuation counts
    std::vector<std::map<std::vector<TokenId>, ContextCounts>> counts_;
};

// Teacher-forced count accumulation over encode_prompt(history) ++ gold_nl
// ++ EOS; only target positions are predicted.
NGramModel fit(const Corpus& corpus, int order, const std::vector<double>& lambdas);

// -sum_j log P(w_j | w_<j, D) over the target tokens plus terminal EOS, in
// nats.
double sequence_nll(const ConditionalSequenceModel& model, const DialogueHistory& history,
                    const NLStateDescription& target);

// exp(total NLL / total predicted tokens)
double corpus_perplexity(const ConditionalSequenceModel& model, const Corpus& corpus);

}  // namespace nldst
