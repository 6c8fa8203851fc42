#pragma once

#include <map>
#include <string>
#include <vector>

#include "nldst/ontology.hpp"
#include "nldst/types.hpp"

namespace nldst {

struct SlotClause {
    std::string slot;
    std::vector<Token> pre;   // connector before the value, e.g. "from"
    std::vector<Token> post;  // trailing words, e.g. "food"
};

struct DomainTemplate {
    std::vector<Token> intro;  // e.g. "user is looking for a train"
    std::vector<SlotClause> clauses;  // canonical slot order for this domain
};

class TemplateSet {
  public:
    static TemplateSet load(const std::string& path);
    static TemplateSet from_json_text(const std::string& text);

    std::vector<Token> empty_state_sentence;
    std::map<std::string, DomainTemplate> domains;

    // every ontology (domain, slot) must have a clause
    void validate_against(const Ontology& ontology) const;
};

// Deterministic rendering: one sentence per domain in sorted domain order,
// sentences joined by ".", slots in template clause order, values in
// canonical form. Empty state renders the fixed empty-state sentence.
NLStateDescription verbalize(const StructuredState& state, const TemplateSet& templates);

}  // namespace nldst
