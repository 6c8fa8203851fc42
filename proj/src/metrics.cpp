#include "nldst/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace nldst {

namespace {

using TurnKey = std::pair<std::string, int>;

TurnKey key_of(const AnnotatedTurnExample& ex) {
    return {ex.history.dialogue_id, ex.history.turns.back().turn_index};
}

std::map<TurnKey, const TurnPrediction*> align(const std::vector<TurnPrediction>& preds,
                                               const Corpus& golds) {
    std::map<TurnKey, const TurnPrediction*> by_key;
    for (const auto& p : preds) {
        if (!by_key.emplace(TurnKey{p.dialogue_id, p.turn_index}, &p).second)
            throw std::invalid_argument("duplicate prediction key: " + p.dialogue_id + "#" +
                                        std::to_string(p.turn_index));
    }
    std::set<TurnKey> gold_keys;
    for (const auto& ex : golds.examples) gold_keys.insert(key_of(ex));
    for (const auto& k : gold_keys)
        if (!by_key.count(k))
            throw std::invalid_argument("missing prediction for turn: " + k.first + "#" +
                                        std::to_string(k.second));
    for (const auto& [k, _] : by_key)
        if (!gold_keys.count(k))
            throw std::invalid_argument("extra prediction for unknown turn: " + k.first + "#" +
                                        std::to_string(k.second));
    return by_key;
}

std::map<std::vector<Token>, size_t> ngram_counts(const NLStateDescription& tokens, int n) {
    std::map<std::vector<Token>, size_t> counts;
    if (static_cast<int>(tokens.size()) < n) return counts;
    for (size_t i = 0; i + static_cast<size_t>(n) <= tokens.size(); ++i)
        ++counts[std::vector<Token>(tokens.begin() + static_cast<long>(i),
                                    tokens.begin() + static_cast<long>(i + n))];
    return counts;
}

size_t lcs_length(const NLStateDescription& a, const NLStateDescription& b) {
    std::vector<size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (size_t i = 1; i <= a.size(); ++i) {
        for (size_t j = 1; j <= b.size(); ++j) {
            if (a[i - 1] == b[j - 1]) cur[j] = prev[j - 1] + 1;
            else cur[j] = std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double f1(double precision, double recall) {
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

double joint_goal_accuracy(const std::vector<TurnPrediction>& preds, const Corpus& golds) {
    auto by_key = align(preds, golds);
    if (golds.examples.empty()) throw std::invalid_argument("no gold turns");
    size_t correct = 0;
    for (const auto& ex : golds.examples)
        if (state_equal(by_key.at(key_of(ex))->predicted_structured, ex.gold_structured))
            ++correct;
    return 100.0 * static_cast<double>(correct) / static_cast<double>(golds.examples.size());
}

double slot_accuracy(const std::vector<TurnPrediction>& preds, const Corpus& golds,
                     const Ontology& ontology) {
    auto by_key = align(preds, golds);
    auto slots = ontology.slot_keys();
    if (golds.examples.empty() || slots.empty())
        throw std::invalid_argument("no gold turns or empty slot universe");
    size_t correct = 0;
    for (const auto& ex : golds.examples) {
        const TurnPrediction* p = by_key.at(key_of(ex));
        for (const auto& [domain, slot] : slots) {
            std::string pred_v = p->predicted_structured.get(domain, slot).value_or("none");
            std::string gold_v = ex.gold_structured.get(domain, slot).value_or("none");
            if (pred_v == gold_v) ++correct;
        }
    }
    return 100.0 * static_cast<double>(correct) /
           static_cast<double>(golds.examples.size() * slots.size());
}

double bleu(const NLStateDescription& candidate, const NLStateDescription& reference,
            int max_order) {
    if (max_order < 1) throw std::invalid_argument("max_order must be >= 1");
    if (candidate.empty()) return 0.0;

    double log_sum = 0.0;
    int used_orders = 0;
    for (int n = 1; n <= max_order; ++n) {
        auto cand = ngram_counts(candidate, n);
        if (cand.empty()) continue;
        auto ref = ngram_counts(reference, n);
        size_t total = 0, matched = 0;
        for (const auto& [gram, c] : cand) {
            total += c;
            auto it = ref.find(gram);
            if (it != ref.end()) matched += std::min(c, it->second);
        }
        double precision = matched > 0
                               ? static_cast<double>(matched) / static_cast<double>(total)
                               : 1.0 / (2.0 * static_cast<double>(total));
        log_sum += std::log(precision);
        ++used_orders;
    }
    if (used_orders == 0) return 0.0;
    double geo = std::exp(log_sum / static_cast<double>(used_orders));

    double c = static_cast<double>(candidate.size());
    double r = static_cast<double>(reference.size());
    double bp = (c >= r) ? 1.0 : std::exp(1.0 - r / c);
    return geo * bp;
}

double rouge(const NLStateDescription& candidate, const NLStateDescription& reference,
             RougeVariant variant) {
    if (candidate.empty() && reference.empty()) return 1.0;
    if (candidate.empty() || reference.empty()) return 0.0;

    if (variant == RougeVariant::rl) {
        double lcs = static_cast<double>(lcs_length(candidate, reference));
        return f1(lcs / static_cast<double>(candidate.size()),
                  lcs / static_cast<double>(reference.size()));
    }
    int n = variant == RougeVariant::r1 ? 1 : 2;
    auto cand = ngram_counts(candidate, n);
    auto ref = ngram_counts(reference, n);
    size_t cand_total = 0, ref_total = 0, matched = 0;
    for (const auto& [_, c] : cand) cand_total += c;
    for (const auto& [_, c] : ref) ref_total += c;
    if (cand_total == 0 && ref_total == 0) return 1.0;  // both too short for this order
    if (cand_total == 0 || ref_total == 0) return 0.0;
    for (const auto& [gram, c] : cand) {
        auto it = ref.find(gram);
        if (it != ref.end()) matched += std::min(c, it->second);
    }
    return f1(static_cast<double>(matched) / static_cast<double>(cand_total),
              static_cast<double>(matched) / static_cast<double>(ref_total));
}

std::map<std::string, DomainScore> per_domain_breakdown(const std::vector<TurnPrediction>& preds,
                                                        const Corpus& golds,
                                                        const Ontology& ontology) {
    auto by_key = align(preds, golds);
    std::map<std::string, DomainScore> out;
    std::map<std::string, size_t> slot_correct, slot_total;
    for (const std::string& domain : ontology.domain_names()) {
        size_t turns = 0, joint_correct = 0, sc = 0, st = 0;
        std::vector<std::string> domain_slots;
        for (const auto& [d, s] : ontology.slot_keys())
            if (d == domain) domain_slots.push_back(s);
        for (const auto& ex : golds.examples) {
            const TurnPrediction* p = by_key.at(key_of(ex));
            bool touches = ex.gold_structured.contains_domain(domain) ||
                           p->predicted_structured.contains_domain(domain);
            if (!touches) continue;
            ++turns;
            if (ex.gold_structured.restrict_to(domain) ==
                p->predicted_structured.restrict_to(domain))
                ++joint_correct;
            for (const std::string& slot : domain_slots) {
                std::string pred_v = p->predicted_structured.get(domain, slot).value_or("none");
                std::string gold_v = ex.gold_structured.get(domain, slot).value_or("none");
                if (pred_v == gold_v) ++sc;
                ++st;
            }
        }
        if (turns == 0) continue;
        DomainScore score;
        score.n_turns = turns;
        score.jga = 100.0 * static_cast<double>(joint_correct) / static_cast<double>(turns);
        score.slot_accuracy = 100.0 * static_cast<double>(sc) / static_cast<double>(st);
        out[domain] = score;
    }
    return out;
}

MetricReport compute_report(const std::vector<TurnPrediction>& preds, const Corpus& golds,
                            const Ontology& ontology) {
    MetricReport report;
    report.n_turns = golds.examples.size();
    report.jga = joint_goal_accuracy(preds, golds);
    report.slot_accuracy = slot_accuracy(preds, golds, ontology);
    report.per_domain = per_domain_breakdown(preds, golds, ontology);

    auto by_key = align(preds, golds);
    double bleu_sum = 0, r1_sum = 0, r2_sum = 0, rl_sum = 0;
    size_t nl_turns = 0;
    for (const auto& ex : golds.examples) {
        const TurnPrediction* p = by_key.at(key_of(ex));
        if (!p->predicted_nl) continue;
        ++nl_turns;
        bleu_sum += bleu(*p->predicted_nl, ex.gold_nl);
        r1_sum += rouge(*p->predicted_nl, ex.gold_nl, RougeVariant::r1);
        r2_sum += rouge(*p->predicted_nl, ex.gold_nl, RougeVariant::r2);
        rl_sum += rouge(*p->predicted_nl, ex.gold_nl, RougeVariant::rl);
    }
    if (nl_turns > 0) {
        report.bleu = bleu_sum / static_cast<double>(nl_turns);
        report.rouge_1 = r1_sum / static_cast<double>(nl_turns);
        report.rouge_2 = r2_sum / static_cast<double>(nl_turns);
        report.rouge_l = rl_sum / static_cast<double>(nl_turns);
    }
    return report;
}

}  // namespace nldst
