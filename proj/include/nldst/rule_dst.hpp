#pragma once

#include "nldst/canonicalizer.hpp"
#include "nldst/ontology.hpp"
#include "nldst/types.hpp"

namespace nldst {

struct RuleDstConfig {
    RuleSet rules;  // targeted at raw user utterances
};

// Pattern-driven baseline: folds over user turns in order, each turn's
// extracted entries overriding previous entries with the same (domain,
// slot) key. System turns are ignored.
StructuredState track(const DialogueHistory& history, const Ontology& ontology,
                      const RuleDstConfig& config);

// Single-turn step used by the incremental form; exposed for tests.
StructuredState track_step(const StructuredState& carried, const Turn& turn,
                           const Ontology& ontology, const RuleDstConfig& config);

}  // namespace nldst
