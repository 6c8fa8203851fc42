#include "nldst/lm.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace nldst {

using nlohmann::json;

Vocabulary::Vocabulary() {
    for (const char* t : {"<bos>", "<eos>", "<unk>", "<sep>", "user:", "system:", "state:"}) {
        TokenId id = static_cast<TokenId>(id_to_token_.size());
        token_to_id_[t] = id;
        id_to_token_.push_back(t);
    }
}

TokenId Vocabulary::add(const std::string& token) {
    auto it = token_to_id_.find(token);
    if (it != token_to_id_.end()) return it->second;
    TokenId id = static_cast<TokenId>(id_to_token_.size());
    token_to_id_[token] = id;
    id_to_token_.push_back(token);
    return id;
}

TokenId Vocabulary::id(const std::string& token) const {
    auto it = token_to_id_.find(token);
    return it == token_to_id_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(TokenId id) const {
    if (id < 0 || id >= static_cast<TokenId>(id_to_token_.size()))
        throw std::out_of_range("token id out of range");
    return id_to_token_[static_cast<size_t>(id)];
}

bool Vocabulary::is_masked_marker(TokenId id) const {
    return id == kBos || id == kUnk || id == kSep || id == kUserTag || id == kSystemTag ||
           id == kStateTag;
}

Vocabulary Vocabulary::from_corpus(const Corpus& corpus) {
    Vocabulary v;
    for (const auto& ex : corpus.examples) {
        for (const Turn& t : ex.history.turns)
            for (const Token& tok : t.utterance) v.add(tok);
        for (const Token& tok : ex.gold_nl) v.add(tok);
    }
    return v;
}

std::vector<TokenId> encode_prompt(const DialogueHistory& history, const Vocabulary& vocab) {
    std::vector<TokenId> out;
    for (size_t i = 0; i < history.turns.size(); ++i) {
        if (i) out.push_back(Vocabulary::kSep);
        const Turn& t = history.turns[i];
        out.push_back(t.speaker == Speaker::user ? Vocabulary::kUserTag : Vocabulary::kSystemTag);
        for (const Token& tok : t.utterance) out.push_back(vocab.id(tok));
    }
    out.push_back(Vocabulary::kStateTag);
    return out;
}

NGramModel::NGramModel(Vocabulary vocab, int order, std::vector<double> lambdas)
    : vocab_(std::move(vocab)), order_(order), lambdas_(std::move(lambdas)) {
    if (order_ < 1) throw std::invalid_argument("order must be >= 1");
    if (lambdas_.size() != static_cast<size_t>(order_))
        throw std::invalid_argument("lambdas length must equal order");
    double sum = 0;
    for (double l : lambdas_) {
        if (l < 0) throw std::invalid_argument("lambdas must be non-negative");
        sum += l;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("lambdas must sum to 1");
    counts_.resize(static_cast<size_t>(order_));
}

void NGramModel::accumulate(const std::vector<TokenId>& sequence, size_t first_predicted) {
    for (size_t i = first_predicted; i < sequence.size(); ++i) {
        for (int k = 1; k <= order_; ++k) {
            size_t ctx_len = std::min<size_t>(static_cast<size_t>(k - 1), i);
            std::vector<TokenId> ctx(sequence.begin() + static_cast<long>(i - ctx_len),
                                     sequence.begin() + static_cast<long>(i));
            ContextCounts& cc = counts_[static_cast<size_t>(k - 1)][ctx];
            ++cc.total;
            ++cc.by_token[sequence[i]];
        }
    }
}

std::vector<double> NGramModel::next_token_distribution(std::span<const TokenId> condition,
                                                        std::span<const TokenId> prefix) const {
    std::vector<TokenId> seq(condition.begin(), condition.end());
    seq.insert(seq.end(), prefix.begin(), prefix.end());
    size_t v = vocab_.size();
    std::vector<double> p(v, 0.0);
    for (int k = 1; k <= order_; ++k) {
        size_t ctx_len = std::min<size_t>(static_cast<size_t>(k - 1), seq.size());
        std::vector<TokenId> ctx(seq.end() - static_cast<long>(ctx_len), seq.end());
        const auto& table = counts_[static_cast<size_t>(k - 1)];
        auto it = table.find(ctx);
        double lambda = lambdas_[static_cast<size_t>(k - 1)];
        if (it == table.end() || it->second.total == 0) {
            double u = lambda / static_cast<double>(v);
            for (double& x : p) x += u;
        } else {
            double total = static_cast<double>(it->second.total);
            for (const auto& [tok, n] : it->second.by_token)
                p[static_cast<size_t>(tok)] += lambda * static_cast<double>(n) / total;
        }
    }
    // smoothing floor, renormalized
    double eps = 1e-6 / static_cast<double>(v);
    double denom = 1.0 + eps * static_cast<double>(v);
    for (double& x : p) x = (x + eps) / denom;
    return p;
}

uint64_t NGramModel::count(int k, const std::vector<TokenId>& context, TokenId token) const {
    if (k < 1 || k > order_) return 0;
    const auto& table = counts_[static_cast<size_t>(k - 1)];
    auto it = table.find(context);
    if (it == table.end()) return 0;
    auto jt = it->second.by_token.find(token);
    return jt == it->second.by_token.end() ? 0 : jt->second;
}

NGramModel fit(const Corpus& corpus, int order, const std::vector<double>& lambdas) {
    if (corpus.examples.empty()) throw std::invalid_argument("cannot fit on an empty corpus");
    NGramModel model(Vocabulary::from_corpus(corpus), order, lambdas);
    for (const auto& ex : corpus.examples) {
        std::vector<TokenId> seq = encode_prompt(ex.history, model.vocab_);
        size_t first_predicted = seq.size();
        for (const Token& tok : ex.gold_nl) seq.push_back(model.vocab_.id(tok));
        seq.push_back(Vocabulary::kEos);
        model.accumulate(seq, first_predicted);
    }
    return model;
}

double sequence_nll(const ConditionalSequenceModel& model, const DialogueHistory& history,
                    const NLStateDescription& target) {
    if (target.empty()) throw std::invalid_argument("sequence_nll requires a non-empty target");
    const Vocabulary& vocab = model.vocab();
    std::vector<TokenId> condition = encode_prompt(history, vocab);
    std::vector<TokenId> prefix;
    std::vector<TokenId> ids;
    for (const Token& tok : target) ids.push_back(vocab.id(tok));
    ids.push_back(Vocabulary::kEos);

    double nll = 0.0;
    for (TokenId next : ids) {
        std::vector<double> p = model.next_token_distribution(condition, prefix);
        double sum = 0.0;
        for (double x : p) {
            if (x < 0.0) throw std::invalid_argument("model emitted a negative probability");
            sum += x;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("model distribution does not sum to 1");
        nll -= std::log(p[static_cast<size_t>(next)]);
        prefix.push_back(next);
    }
    return nll;
}

double corpus_perplexity(const ConditionalSequenceModel& model, const Corpus& corpus) {
    if (corpus.examples.empty())
        throw std::invalid_argument("cannot compute perplexity of an empty corpus");
    double total_nll = 0.0;
    size_t total_tokens = 0;
    for (const auto& ex : corpus.examples) {
        total_nll += sequence_nll(model, ex.history, ex.gold_nl);
        total_tokens += ex.gold_nl.size() + 1;  // + EOS
    }
    return std::exp(total_nll / static_cast<double>(total_tokens));
}

void NGramModel::save(const std::string& path) const {
    json j;
    j["format_version"] = 1;
    j["order"] = order_;
    j["lambdas"] = lambdas_;
    json vocab = json::array();
    for (size_t i = 0; i < vocab_.size(); ++i) vocab.push_back(vocab_.token(static_cast<TokenId>(i)));
    j["vocab"] = vocab;
    json tables = json::array();
    for (const auto& table : counts_) {
        json entries = json::array();
        for (const auto& [ctx, cc] : table) {
            json counts = json::array();
            for (const auto& [tok, n] : cc.by_token) counts.push_back({tok, n});
            entries.push_back({{"context", ctx}, {"counts", counts}});
        }
        tables.push_back(entries);
    }
    j["tables"] = tables;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open model file for writing: " + path);
    out << j.dump() << "\n";
}

NGramModel NGramModel::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    json j = json::parse(in);
    if (j.value("format_version", 0) != 1)
        throw std::runtime_error("unsupported model format in: " + path);
    Vocabulary vocab;
    const auto& tokens = j.at("vocab");
    for (size_t i = 7; i < tokens.size(); ++i) vocab.add(tokens[i].get<std::string>());
    NGramModel model(std::move(vocab), j.at("order").get<int>(),
                     j.at("lambdas").get<std::vector<double>>());
    const auto& tables = j.at("tables");
    for (size_t k = 0; k < tables.size(); ++k) {
        for (const auto& entry : tables[k]) {
            auto ctx = entry.at("context").get<std::vector<TokenId>>();
            ContextCounts& cc = model.counts_[k][ctx];
            for (const auto& pair : entry.at("counts")) {
                TokenId tok = pair.at(0).get<TokenId>();
                uint64_t n = pair.at(1).get<uint64_t>();
                cc.by_token[tok] = n;
                cc.total += n;
            }
        }
    }
    return model;
}

}  // namespace nldst
