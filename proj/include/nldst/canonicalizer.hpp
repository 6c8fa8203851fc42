#pragma once

#include <map>
#include <string>
#include <vector>

#include "nldst/ontology.hpp"
#include "nldst/types.hpp"

namespace nldst {

enum class ValueDecoder { closed_set, time_expression, passthrough };

struct ExtractionRule {
    std::string domain;
    std::string slot;
    std::vector<std::vector<Token>> triggers;  // token patterns, matched whole-token
    ValueDecoder decoder = ValueDecoder::closed_set;
};

// One pattern engine, two grammars: the same rule machinery parses NL state
// descriptions (canonicalizer) and raw user utterances (rule-dst baseline).
class RuleSet {
  public:
    static RuleSet load(const std::string& path);
    static RuleSet from_json_text(const std::string& text);

    std::map<std::string, std::vector<std::vector<Token>>> domain_triggers;
    std::vector<ExtractionRule> rules;

    const ExtractionRule* find(const std::string& domain, const std::string& slot) const;
};

// Scans tokens left to right, tracking a current-domain context set by the
// domain trigger phrases; a slot rule fires only inside its own domain.
// Later matches on the same (domain, slot) override earlier ones. Unmatched
// text is ignored; nothing here throws on garbage input.
StructuredState extract_entries(const std::vector<Token>& tokens, const Ontology& ontology,
                                const RuleSet& rules);

// Parse a generated NL state description back into a structured state.
// Unparseable descriptions yield the empty state.
StructuredState canonicalize(const NLStateDescription& description, const Ontology& ontology,
                             const RuleSet& rules);

}  // namespace nldst
