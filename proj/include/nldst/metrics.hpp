#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nldst/ontology.hpp"
#include "nldst/types.hpp"

namespace nldst {

struct TurnPrediction {
    std::string dialogue_id;
    int turn_index = 0;
    StructuredState predicted_structured;
    std::optional<NLStateDescription> predicted_nl;  // absent for structured-output systems
    bool error = false;                              // backend failure, scored as empty state
};

struct DomainScore {
    double jga = 0.0;
    double slot_accuracy = 0.0;
    size_t n_turns = 0;
};

struct MetricReport {
    double jga = 0.0;            // percentage
    double slot_accuracy = 0.0;  // percentage
    double bleu = 0.0;           // [0, 1]
    double rouge_1 = 0.0;
    double rouge_2 = 0.0;
    double rouge_l = 0.0;
    std::map<std::string, DomainScore> per_domain;
    size_t n_turns = 0;
};

// Exact-match percentage per turn; prediction keys must cover exactly the
// gold turn keys, otherwise a contract violation naming offenders.
double joint_goal_accuracy(const std::vector<TurnPrediction>& preds, const Corpus& golds);

// Per-(turn, ontology slot) correctness with absence on both sides scored
// as the value "none", averaged as a percentage.
double slot_accuracy(const std::vector<TurnPrediction>& preds, const Corpus& golds,
                     const Ontology& ontology);

// Geometric mean of clipped modified n-gram precisions (zero precisions
// floored at 1/(2 * candidate n-gram count)) times the brevity penalty.
double bleu(const NLStateDescription& candidate, const NLStateDescription& reference,
            int max_order = 4);

enum class RougeVariant { r1, r2, rl };

// F1 of unigram/bigram overlap or longest-common-subsequence. Both inputs
// empty -> 1.0; exactly one empty -> 0.0.
double rouge(const NLStateDescription& candidate, const NLStateDescription& reference,
             RougeVariant variant);

// A turn contributes to domain d iff gold or predicted state touches d;
// domain-restricted states are then compared under the same definitions.
std::map<std::string, DomainScore> per_domain_breakdown(const std::vector<TurnPrediction>& preds,
                                                        const Corpus& golds,
                                                        const Ontology& ontology);

// Full report; BLEU/ROUGE average over turns carrying predicted_nl, against
// the verbalized gold reference.
MetricReport compute_report(const std::vector<TurnPrediction>& preds, const Corpus& golds,
                            const Ontology& ontology);

}  // namespace nldst
