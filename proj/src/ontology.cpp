#include "nldst/ontology.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "nldst/text.hpp"

namespace nldst {

using nlohmann::json;

Ontology Ontology::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open ontology file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

Ontology Ontology::from_json_text(const std::string& text) {
    json j = json::parse(text);
    Ontology o;
    for (const auto& [domain, slots] : j.at("domains").items()) {
        for (const auto& [slot, spec] : slots.items()) {
            SlotSpec s;
            std::string kind = spec.at("kind").get<std::string>();
            if (kind == "closed") s.kind = ValueKind::closed;
            else if (kind == "time") s.kind = ValueKind::time;
            else if (kind == "free") s.kind = ValueKind::free_form;
            else throw std::runtime_error("unknown slot kind: " + kind);
            if (s.kind == ValueKind::closed)
                s.values = spec.at("values").get<std::vector<std::string>>();
            o.domains_[domain][slot] = std::move(s);
        }
    }
    if (j.contains("synonyms"))
        for (const auto& [surface, canonical] : j["synonyms"].items())
            o.synonyms_[surface] = canonical.get<std::string>();
    if (j.contains("slot_patterns"))
        for (const auto& [key, phrase] : j["slot_patterns"].items()) {
            auto dash = key.find('-');
            if (dash == std::string::npos)
                throw std::runtime_error("slot_patterns key must be domain-slot: " + key);
            o.slot_patterns_[{key.substr(0, dash), key.substr(dash + 1)}] =
                phrase.get<std::string>();
        }
    if (j.contains("taskmaster_labels"))
        for (const auto& [label, target] : j["taskmaster_labels"].items())
            o.taskmaster_labels_[label] = {target.at("domain").get<std::string>(),
                                           target.at("slot").get<std::string>()};
    return o;
}

bool Ontology::has_domain(const std::string& domain) const { return domains_.count(domain) > 0; }

bool Ontology::has_slot(const std::string& domain, const std::string& slot) const {
    auto it = domains_.find(domain);
    return it != domains_.end() && it->second.count(slot) > 0;
}

const SlotSpec* Ontology::slot_spec(const std::string& domain, const std::string& slot) const {
    auto it = domains_.find(domain);
    if (it == domains_.end()) return nullptr;
    auto jt = it->second.find(slot);
    return jt == it->second.end() ? nullptr : &jt->second;
}

std::vector<std::string> Ontology::domain_names() const {
    std::vector<std::string> out;
    for (const auto& [d, _] : domains_) out.push_back(d);
    return out;
}

std::vector<std::pair<std::string, std::string>> Ontology::slot_keys() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [d, slots] : domains_)
        for (const auto& [s, _] : slots) out.emplace_back(d, s);
    return out;
}

size_t Ontology::slot_count() const {
    size_t n = 0;
    for (const auto& [_, slots] : domains_) n += slots.size();
    return n;
}

std::string Ontology::normalize_value(const std::string& domain, const std::string& slot,
                                      const std::string& surface) const {
    const SlotSpec* spec = slot_spec(domain, slot);
    if (!spec) return "";
    std::string v = join_tokens(tokenize(surface));
    if (auto it = synonyms_.find(v); it != synonyms_.end()) v = it->second;
    switch (spec->kind) {
        case ValueKind::time: {
            std::string t = normalize_time(v);
            return t.empty() ? "" : t;
        }
        case ValueKind::closed:
            if (std::find(spec->values.begin(), spec->values.end(), v) == spec->values.end())
                return "";
            return v;
        case ValueKind::free_form:
            return v;
    }
    return "";
}

void Ontology::validate(const StructuredState& state) const {
    for (const SlotValue& sv : state.entries()) {
        const SlotSpec* spec = slot_spec(sv.domain, sv.slot);
        if (!spec)
            throw std::invalid_argument("unknown slot: " + sv.domain + "-" + sv.slot);
        if (spec->kind == ValueKind::closed &&
            std::find(spec->values.begin(), spec->values.end(), sv.value) == spec->values.end())
            throw std::invalid_argument("value not in closed set: " + sv.domain + "-" + sv.slot +
                                        "=" + sv.value);
    }
}

}  // namespace nldst
