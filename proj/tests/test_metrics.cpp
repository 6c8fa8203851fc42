#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "nldst/metrics.hpp"
#include "nldst/text.hpp"

using namespace nldst;
using nldst::testing::one_user_turn;
using nldst::testing::ontology;
using nldst::testing::random_state;
using nldst::testing::templates;
using nldst::testing::train_state;

namespace {

Corpus gold_corpus(const std::vector<StructuredState>& states) {
    Corpus c;
    for (size_t i = 0; i < states.size(); ++i) {
        AnnotatedTurnExample ex;
        ex.history = one_user_turn("d" + std::to_string(i), "hello");
        ex.gold_structured = states[i];
        ex.gold_nl = verbalize(states[i], templates());
        c.examples.push_back(ex);
    }
    return c;
}

std::vector<TurnPrediction> predictions_for(const Corpus& golds,
                                            const std::vector<StructuredState>& predicted) {
    std::vector<TurnPrediction> preds;
    for (size_t i = 0; i < golds.examples.size(); ++i) {
        TurnPrediction p;
        p.dialogue_id = golds.examples[i].history.dialogue_id;
        p.turn_index = golds.examples[i].history.turns.back().turn_index;
        p.predicted_structured = predicted[i];
        preds.push_back(p);
    }
    return preds;
}

}  // namespace

TEST_CASE("joint goal accuracy definition") {
    StructuredState a = train_state();
    StructuredState b;
    b.set("restaurant", "food", "italian");
    Corpus golds = gold_corpus({a, b});

    CHECK(joint_goal_accuracy(predictions_for(golds, {a, b}), golds) == 100.0);
    CHECK(joint_goal_accuracy(predictions_for(golds, {a, StructuredState{}}), golds) == 50.0);

    StructuredState partial;
    for (const SlotValue& sv : a.entries())
        if (sv.slot != "day") partial.set(sv);
    Corpus one = gold_corpus({a});
    CHECK(joint_goal_accuracy(predictions_for(one, {partial}), one) == 0.0);
}

TEST_CASE("prediction keys must cover the gold keys exactly") {
    Corpus golds = gold_corpus({train_state(), StructuredState{}});
    auto preds = predictions_for(golds, {train_state(), StructuredState{}});

    auto missing = preds;
    missing.pop_back();
    CHECK_THROWS(joint_goal_accuracy(missing, golds));

    auto extra = preds;
    TurnPrediction stray;
    stray.dialogue_id = "stray";
    extra.push_back(stray);
    CHECK_THROWS(joint_goal_accuracy(extra, golds));
    CHECK_THROWS(slot_accuracy(missing, golds, ontology()));
}

TEST_CASE("slot accuracy under the none convention") {
    // full ontology: 17 slots; gold = 4-slot train state, prediction wrong on
    // one of them and absent elsewhere on both sides
    StructuredState gold = train_state();
    StructuredState pred = gold;
    pred.set("train", "day", "friday");
    Corpus golds = gold_corpus({gold});
    REQUIRE(ontology().slot_count() == 17);
    CHECK(slot_accuracy(predictions_for(golds, {pred}), golds, ontology()) ==
          doctest::Approx(100.0 * 16.0 / 17.0));

    // restricted to the 4 train slots, prediction missing the day entry
    Ontology trains = Ontology::from_json_text(R"({
      "domains": {"train": {
        "departure": {"kind": "closed", "values": ["london kings cross", "cambridge"]},
        "destination": {"kind": "closed", "values": ["london kings cross", "cambridge"]},
        "day": {"kind": "closed", "values": ["monday"]},
        "leaveat": {"kind": "time"}}}})");
    StructuredState partial;
    for (const SlotValue& sv : gold.entries())
        if (sv.slot != "day") partial.set(sv);
    CHECK(slot_accuracy(predictions_for(golds, {partial}), golds, trains) == 75.0);
}

TEST_CASE("bleu golden values") {
    auto cand = tokenize("the the the the");
    auto ref = tokenize("the cat is here");
    CHECK(bleu(cand, ref, 1) == 0.25);
    CHECK(bleu(ref, ref) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(bleu({}, ref) == 0.0);
}

TEST_CASE("bleu brevity penalty and bounds") {
    auto ref = tokenize("a b c d");
    auto shorter = tokenize("a b");
    double v = bleu(shorter, ref, 1);
    CHECK(v == doctest::Approx(std::exp(1.0 - 4.0 / 2.0)).epsilon(1e-12));
    Rng rng(2);
    for (int i = 0; i < 100; ++i) {
        NLStateDescription c, r;
        size_t nc = 1 + rng.below(6), nr = 1 + rng.below(6);
        for (size_t k = 0; k < nc; ++k) c.push_back(std::string(1, static_cast<char>('a' + rng.below(4))));
        for (size_t k = 0; k < nr; ++k) r.push_back(std::string(1, static_cast<char>('a' + rng.below(4))));
        double b = bleu(c, r);
        CHECK(b >= 0.0);
        CHECK(b <= 1.0);
    }
}

TEST_CASE("rouge golden values") {
    auto cand = tokenize("the cat");
    auto ref = tokenize("the cat sat");
    CHECK(rouge(cand, ref, RougeVariant::r1) == doctest::Approx(0.8).epsilon(1e-12));
    for (RougeVariant v : {RougeVariant::r1, RougeVariant::r2, RougeVariant::rl}) {
        CHECK(rouge(ref, ref, v) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(rouge({}, {}, v) == 1.0);
        CHECK(rouge({}, ref, v) == 0.0);
        CHECK(rouge(ref, {}, v) == 0.0);
    }
    CHECK(rouge(tokenize("aa bb"), tokenize("cc dd"), RougeVariant::r1) == 0.0);
}

TEST_CASE("rouge-l uses the longest common subsequence") {
    auto cand = tokenize("a x b y c");
    auto ref = tokenize("a b c");
    // lcs = 3, P = 3/5, R = 1
    CHECK(rouge(cand, ref, RougeVariant::rl) ==
          doctest::Approx(2.0 * 0.6 * 1.0 / 1.6).epsilon(1e-12));
}

TEST_CASE("jga never exceeds slot accuracy on randomized predictions") {
    Rng rng(47);
    for (int trial = 0; trial < 1000; ++trial) {
        size_t n = 1 + rng.below(5);
        std::vector<StructuredState> golds, preds;
        for (size_t i = 0; i < n; ++i) {
            golds.push_back(rng.below(4) == 0 ? StructuredState{}
                                              : random_state(rng, ontology(), 1 + rng.below(4)));
            preds.push_back(rng.below(4) == 0 ? golds.back()
                                              : random_state(rng, ontology(), rng.below(4) + 1));
        }
        Corpus corpus = gold_corpus(golds);
        auto p = predictions_for(corpus, preds);
        CHECK(joint_goal_accuracy(p, corpus) <= slot_accuracy(p, corpus, ontology()) + 1e-9);
    }
}

TEST_CASE("per-domain breakdown matches a brute-force recount") {
    StructuredState s1;
    s1.set("train", "day", "monday");
    s1.set("hotel", "stars", "4");
    StructuredState s2;
    s2.set("hotel", "area", "north");
    StructuredState s3 = train_state();
    Corpus golds = gold_corpus({s1, s2, s3});

    StructuredState p1 = s1;                     // exact
    StructuredState p2;
    p2.set("restaurant", "food", "italian");     // touches a third domain
    StructuredState p3;
    for (const SlotValue& sv : s3.entries())
        if (sv.slot != "day") p3.set(sv);
    auto preds = predictions_for(golds, {p1, p2, p3});

    auto breakdown = per_domain_breakdown(preds, golds, ontology());
    REQUIRE(breakdown.count("train") == 1);
    REQUIRE(breakdown.count("hotel") == 1);
    REQUIRE(breakdown.count("restaurant") == 1);
    CHECK(breakdown.count("taxi") == 0);  // untouched domains never appear

    // train: turns 1 and 3; turn 1 matches, turn 3 misses the day slot
    CHECK(breakdown["train"].n_turns == 2);
    CHECK(breakdown["train"].jga == 50.0);
    // hotel: turns 1 and 2; turn 1 matches, turn 2 predicts nothing
    CHECK(breakdown["hotel"].n_turns == 2);
    CHECK(breakdown["hotel"].jga == 50.0);
    // restaurant: only turn 2, predicted-but-not-gold
    CHECK(breakdown["restaurant"].n_turns == 1);
    CHECK(breakdown["restaurant"].jga == 0.0);

    // perfect predictions put every touched domain at 100
    auto perfect = predictions_for(golds, {s1, s2, s3});
    for (const auto& [domain, score] : per_domain_breakdown(perfect, golds, ontology())) {
        CHECK(score.jga == 100.0);
        CHECK(score.slot_accuracy == 100.0);
    }
}

TEST_CASE("metrics are permutation invariant") {
    StructuredState a = train_state();
    StructuredState b;
    b.set("restaurant", "food", "italian");
    StructuredState c;
    c.set("hotel", "stars", "3");
    Corpus golds = gold_corpus({a, b, c});
    auto preds = predictions_for(golds, {a, StructuredState{}, c});

    auto shuffled = preds;
    std::rotate(shuffled.begin(), shuffled.begin() + 1, shuffled.end());
    CHECK(joint_goal_accuracy(preds, golds) == joint_goal_accuracy(shuffled, golds));
    CHECK(slot_accuracy(preds, golds, ontology()) == slot_accuracy(shuffled, golds, ontology()));
    auto r1 = compute_report(preds, golds, ontology());
    auto r2 = compute_report(shuffled, golds, ontology());
    CHECK(r1.jga == r2.jga);
    CHECK(r1.slot_accuracy == r2.slot_accuracy);
    CHECK(r1.bleu == r2.bleu);
}

TEST_CASE("compute_report scores text only where predicted_nl is present") {
    StructuredState a = train_state();
    Corpus golds = gold_corpus({a});
    auto preds = predictions_for(golds, {a});

    MetricReport structured_only = compute_report(preds, golds, ontology());
    CHECK(structured_only.jga == 100.0);
    CHECK(structured_only.bleu == 0.0);  // no NL predictions to score

    preds[0].predicted_nl = golds.examples[0].gold_nl;
    MetricReport with_text = compute_report(preds, golds, ontology());
    CHECK(with_text.bleu == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(with_text.rouge_1 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(with_text.rouge_2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(with_text.rouge_l == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(with_text.n_turns == 1);
}
