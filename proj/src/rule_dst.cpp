#include "nldst/rule_dst.hpp"

namespace nldst {

StructuredState track_step(const StructuredState& carried, const Turn& turn,
                           const Ontology& ontology, const RuleDstConfig& config) {
    StructuredState state = carried;
    if (turn.speaker != Speaker::user) return state;
    StructuredState extracted = extract_entries(turn.utterance, ontology, config.rules);
    for (const SlotValue& sv : extracted.entries()) state.set(sv);
    return state;
}

StructuredState track(const DialogueHistory& history, const Ontology& ontology,
                      const RuleDstConfig& config) {
    StructuredState state;
    for (const Turn& turn : history.turns) state = track_step(state, turn, ontology, config);
    return state;
}

}  // namespace nldst
