#pragma once

#include <string>
#include <vector>

#include "nldst/canonicalizer.hpp"
#include "nldst/ontology.hpp"
#include "nldst/rng.hpp"
#include "nldst/types.hpp"
#include "nldst/verbalizer.hpp"

namespace nldst::testing {

inline std::string data_path(const std::string& name) {
    return std::string(NLDST_DATA_DIR) + "/" + name;
}

inline std::string fixture_path(const std::string& name) {
    return std::string(NLDST_FIXTURE_DIR) + "/" + name;
}

inline const Ontology& ontology() {
    static Ontology o = Ontology::load(data_path("ontology.json"));
    return o;
}

inline const TemplateSet& templates() {
    static TemplateSet t = TemplateSet::load(data_path("templates.json"));
    return t;
}

inline const RuleSet& rules() {
    static RuleSet r = RuleSet::load(data_path("rules.json"));
    return r;
}

// the recurring four-slot train state
inline StructuredState train_state() {
    StructuredState s;
    s.set("train", "departure", "london kings cross");
    s.set("train", "destination", "cambridge");
    s.set("train", "day", "monday");
    s.set("train", "leaveat", "07:00");
    return s;
}

// uniformly random valid state with n_entries distinct slots
inline StructuredState random_state(Rng& rng, const Ontology& ont, size_t n_entries) {
    auto keys = ont.slot_keys();
    StructuredState s;
    while (s.size() < n_entries) {
        const auto& [domain, slot] = keys[rng.below(keys.size())];
        const SlotSpec* spec = ont.slot_spec(domain, slot);
        if (spec->kind == ValueKind::time) {
            char buf[6];
            std::snprintf(buf, sizeof(buf), "%02d:%02d", static_cast<int>(rng.below(24)),
                          static_cast<int>(rng.below(60)));
            s.set(domain, slot, buf);
        } else {
            s.set(domain, slot, spec->values[rng.below(spec->values.size())]);
        }
    }
    return s;
}

inline DialogueHistory one_user_turn(const std::string& id, const std::string& text) {
    DialogueHistory h;
    h.dialogue_id = id;
    Turn t;
    t.speaker = Speaker::user;
    t.utterance = tokenize(text);
    t.turn_index = 0;
    h.turns.push_back(std::move(t));
    return h;
}

}  // namespace nldst::testing
