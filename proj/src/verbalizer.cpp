#include "nldst/verbalizer.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "nldst/text.hpp"

namespace nldst {

using nlohmann::json;

TemplateSet TemplateSet::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open template file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

TemplateSet TemplateSet::from_json_text(const std::string& text) {
    json j = json::parse(text);
    TemplateSet ts;
    ts.empty_state_sentence = tokenize(j.at("empty_state").get<std::string>());
    for (const auto& [domain, t] : j.at("domains").items()) {
        DomainTemplate dt;
        dt.intro = tokenize(t.at("intro").get<std::string>());
        for (const auto& c : t.at("slots")) {
            SlotClause clause;
            clause.slot = c.at("slot").get<std::string>();
            if (c.contains("pre")) clause.pre = tokenize(c["pre"].get<std::string>());
            if (c.contains("post")) clause.post = tokenize(c["post"].get<std::string>());
            dt.clauses.push_back(std::move(clause));
        }
        ts.domains[domain] = std::move(dt);
    }
    return ts;
}

void TemplateSet::validate_against(const Ontology& ontology) const {
    for (const auto& [domain, slot] : ontology.slot_keys()) {
        auto it = domains.find(domain);
        if (it == domains.end())
            throw std::runtime_error("no template for domain: " + domain);
        bool found = false;
        for (const auto& c : it->second.clauses)
            if (c.slot == slot) found = true;
        if (!found)
            throw std::runtime_error("no template clause for slot: " + domain + "-" + slot);
    }
}

NLStateDescription verbalize(const StructuredState& state, const TemplateSet& templates) {
    if (state.empty()) return templates.empty_state_sentence;
    NLStateDescription out;
    bool first_domain = true;
    // entries() is (domain, slot) sorted; walk domains in that order
    std::string prev_domain;
    for (const SlotValue& sv : state.entries()) {
        if (sv.domain == prev_domain) continue;
        prev_domain = sv.domain;
        auto it = templates.domains.find(sv.domain);
        if (it == templates.domains.end())
            throw std::invalid_argument("no template for domain: " + sv.domain);
        const DomainTemplate& dt = it->second;
        if (!first_domain) out.push_back(".");
        first_domain = false;
        out.insert(out.end(), dt.intro.begin(), dt.intro.end());
        size_t rendered = 0;
        for (const SlotClause& clause : dt.clauses) {
            auto value = state.get(sv.domain, clause.slot);
            if (!value) continue;
            out.insert(out.end(), clause.pre.begin(), clause.pre.end());
            auto value_tokens = tokenize(*value);
            out.insert(out.end(), value_tokens.begin(), value_tokens.end());
            out.insert(out.end(), clause.post.begin(), clause.post.end());
            ++rendered;
        }
        if (rendered != state.restrict_to(sv.domain).size())
            throw std::invalid_argument("template set lacks a clause for a slot in domain: " +
                                        sv.domain);
    }
    return out;
}

}  // namespace nldst
