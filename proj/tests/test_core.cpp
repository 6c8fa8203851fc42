#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "helpers.hpp"
#include "nldst/rng.hpp"
#include "nldst/text.hpp"
#include "nldst/types.hpp"

using namespace nldst;
using nldst::testing::ontology;
using nldst::testing::random_state;
using nldst::testing::train_state;

TEST_CASE("tokenize basics") {
    CHECK(tokenize("") == std::vector<Token>{});
    CHECK(tokenize("London Kings Cross") == std::vector<Token>{"london", "kings", "cross"});
    CHECK(tokenize("7am, Monday.") == std::vector<Token>{"7am", ",", "monday", "."});
    CHECK(tokenize("  spaced \t out  ") == std::vector<Token>{"spaced", "out"});
}

TEST_CASE("tokenize keeps colon between digits") {
    CHECK(tokenize("07:00") == std::vector<Token>{"07:00"});
    CHECK(tokenize("state: 07:00") == std::vector<Token>{"state", ":", "07:00"});
}

TEST_CASE("tokenize is idempotent on joined output") {
    Rng rng(41);
    std::vector<std::string> samples{"London Kings Cross", "7am, Monday.",
                                     "i need a train at 07:00!", "a-b c;d", "Hello...  World"};
    for (const auto& raw : samples) {
        auto once = tokenize(raw);
        CHECK(tokenize(join_tokens(once)) == once);
    }
}

TEST_CASE("state_equal identity and difference") {
    StructuredState s = train_state();
    CHECK(state_equal(s, s));
    StructuredState partial;
    for (const SlotValue& sv : s.entries())
        if (sv.slot != "day") partial.set(sv);
    CHECK_FALSE(state_equal(s, partial));
    CHECK(state_equal(StructuredState{}, StructuredState{}));
}

TEST_CASE("state_equal is an equivalence relation on random states") {
    Rng rng(99);
    for (int i = 0; i < 200; ++i) {
        StructuredState a = random_state(rng, ontology(), 1 + rng.below(4));
        StructuredState b = random_state(rng, ontology(), 1 + rng.below(4));
        StructuredState c = random_state(rng, ontology(), 1 + rng.below(4));
        CHECK(state_equal(a, a));
        CHECK(state_equal(a, b) == state_equal(b, a));
        if (state_equal(a, b) && state_equal(b, c)) CHECK(state_equal(a, c));
    }
}

TEST_CASE("insertion with an existing key replaces the value") {
    StructuredState s;
    s.set("train", "day", "monday");
    s.set("train", "day", "tuesday");
    CHECK(s.size() == 1);
    CHECK(s.get("train", "day") == "tuesday");

    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        StructuredState r = random_state(rng, ontology(), 1 + rng.below(5));
        std::set<std::pair<std::string, std::string>> keys;
        for (const SlotValue& sv : r.entries())
            CHECK(keys.insert({sv.domain, sv.slot}).second);
    }
}

TEST_CASE("entries come back in (domain, slot) order") {
    StructuredState s = train_state();
    s.set("restaurant", "food", "italian");
    auto entries = s.entries();
    for (size_t i = 1; i < entries.size(); ++i) {
        auto prev = std::pair{entries[i - 1].domain, entries[i - 1].slot};
        auto cur = std::pair{entries[i].domain, entries[i].slot};
        CHECK(prev < cur);
    }
    CHECK(entries.front().domain == "restaurant");
}

TEST_CASE("restrict_to keeps only one domain") {
    StructuredState s = train_state();
    s.set("restaurant", "food", "italian");
    StructuredState t = s.restrict_to("train");
    CHECK(t.size() == 4);
    CHECK_FALSE(t.contains_domain("restaurant"));
    CHECK(s.restrict_to("hotel").empty());
}

TEST_CASE("dialogue history validity") {
    DialogueHistory h = nldst::testing::one_user_turn("d1", "hi");
    CHECK(h.valid());

    DialogueHistory empty;
    empty.dialogue_id = "d2";
    CHECK_FALSE(empty.valid());

    DialogueHistory gap = h;
    Turn t;
    t.speaker = Speaker::system;
    t.turn_index = 2;  // skips index 1
    gap.turns.push_back(t);
    CHECK_FALSE(gap.valid());
}

TEST_CASE("rng streams are deterministic and portable") {
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());

    Rng c(7);
    for (int i = 0; i < 1000; ++i) {
        double u = c.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(c.below(10) < 10);
    }

    CHECK(turn_rng(1, "d", 0).next() != turn_rng(1, "d", 1).next());
    CHECK(turn_rng(1, "d", 0).next() != turn_rng(2, "d", 0).next());
    CHECK(turn_rng(1, "d", 0).next() == turn_rng(1, "d", 0).next());
}
