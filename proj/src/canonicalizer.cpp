#include "nldst/canonicalizer.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "nldst/text.hpp"

namespace nldst {

using nlohmann::json;

RuleSet RuleSet::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open rule file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

RuleSet RuleSet::from_json_text(const std::string& text) {
    json j = json::parse(text);
    RuleSet rs;
    for (const auto& [domain, phrases] : j.at("domain_triggers").items())
        for (const auto& phrase : phrases)
            rs.domain_triggers[domain].push_back(tokenize(phrase.get<std::string>()));
    for (const auto& r : j.at("rules")) {
        ExtractionRule rule;
        rule.domain = r.at("domain").get<std::string>();
        rule.slot = r.at("slot").get<std::string>();
        for (const auto& t : r.at("triggers"))
            rule.triggers.push_back(tokenize(t.get<std::string>()));
        std::string dec = r.at("decoder").get<std::string>();
        if (dec == "closed") rule.decoder = ValueDecoder::closed_set;
        else if (dec == "time") rule.decoder = ValueDecoder::time_expression;
        else if (dec == "passthrough") rule.decoder = ValueDecoder::passthrough;
        else throw std::runtime_error("unknown decoder: " + dec);
        if (rule.triggers.empty()) throw std::runtime_error("rule with no triggers");
        rs.rules.push_back(std::move(rule));
    }
    return rs;
}

const ExtractionRule* RuleSet::find(const std::string& domain, const std::string& slot) const {
    for (const auto& r : rules)
        if (r.domain == domain && r.slot == slot) return &r;
    return nullptr;
}

namespace {

bool match_at(const std::vector<Token>& tokens, size_t pos, const std::vector<Token>& phrase) {
    if (phrase.empty() || pos + phrase.size() > tokens.size()) return false;
    for (size_t i = 0; i < phrase.size(); ++i)
        if (tokens[pos + i] != phrase[i]) return false;
    return true;
}

struct ValueMatch {
    std::string canonical;
    size_t consumed = 0;
};

// Longest-match lookup of a closed-set value (or a synonym resolving into
// the set) starting at pos.
ValueMatch decode_closed(const std::vector<Token>& tokens, size_t pos, const Ontology& ontology,
                         const std::string& domain, const std::string& slot) {
    const SlotSpec* spec = ontology.slot_spec(domain, slot);
    if (!spec) return {};
    std::vector<std::pair<std::vector<Token>, std::string>> surfaces;
    for (const auto& v : spec->values) surfaces.emplace_back(tokenize(v), v);
    for (const auto& [surface, canonical] : ontology.synonyms())
        if (std::find(spec->values.begin(), spec->values.end(), canonical) != spec->values.end())
            surfaces.emplace_back(tokenize(surface), canonical);
    ValueMatch best;
    for (const auto& [surface, canonical] : surfaces)
        if (surface.size() > best.consumed && match_at(tokens, pos, surface))
            best = {canonical, surface.size()};
    return best;
}

ValueMatch decode_time(const std::vector<Token>& tokens, size_t pos) {
    // "7:05 pm" spans two tokens, prefer the longer reading
    for (size_t len : {size_t{2}, size_t{1}}) {
        if (pos + len > tokens.size()) continue;
        std::string surface = tokens[pos];
        for (size_t i = 1; i < len; ++i) surface += " " + tokens[pos + i];
        std::string t = normalize_time(surface);
        if (!t.empty()) return {t, len};
    }
    return {};
}

ValueMatch decode_value(const std::vector<Token>& tokens, size_t pos, const Ontology& ontology,
                        const ExtractionRule& rule) {
    switch (rule.decoder) {
        case ValueDecoder::closed_set:
            return decode_closed(tokens, pos, ontology, rule.domain, rule.slot);
        case ValueDecoder::time_expression:
            return decode_time(tokens, pos);
        case ValueDecoder::passthrough:
            if (pos < tokens.size()) return {tokens[pos], 1};
            return {};
    }
    return {};
}

}  // namespace

StructuredState extract_entries(const std::vector<Token>& tokens, const Ontology& ontology,
                                const RuleSet& rules) {
    StructuredState state;
    std::string current_domain;
    size_t pos = 0;
    while (pos < tokens.size()) {
        // slot rules of the current domain first, longest trigger wins
        const ExtractionRule* hit = nullptr;
        size_t hit_trigger_len = 0;
        ValueMatch hit_value;
        if (!current_domain.empty()) {
            for (const auto& rule : rules.rules) {
                if (rule.domain != current_domain) continue;
                for (const auto& trigger : rule.triggers) {
                    if (trigger.size() <= hit_trigger_len) continue;
                    if (!match_at(tokens, pos, trigger)) continue;
                    ValueMatch vm = decode_value(tokens, pos + trigger.size(), ontology, rule);
                    if (vm.consumed == 0) continue;
                    hit = &rule;
                    hit_trigger_len = trigger.size();
                    hit_value = vm;
                }
            }
        }
        if (hit) {
            state.set(hit->domain, hit->slot, hit_value.canonical);
            pos += hit_trigger_len + hit_value.consumed;
            continue;
        }
        bool domain_hit = false;
        for (const auto& [domain, phrases] : rules.domain_triggers) {
            for (const auto& phrase : phrases) {
                if (match_at(tokens, pos, phrase)) {
                    current_domain = domain;
                    pos += phrase.size();
                    domain_hit = true;
                    break;
                }
            }
            if (domain_hit) break;
        }
        if (!domain_hit) ++pos;
    }
    return state;
}

StructuredState canonicalize(const NLStateDescription& description, const Ontology& ontology,
                             const RuleSet& rules) {
    return extract_entries(description, ontology, rules);
}

}  // namespace nldst
