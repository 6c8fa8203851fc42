#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nldst/types.hpp"

namespace nldst {

enum class ValueKind { closed, time, free_form };

struct SlotSpec {
    ValueKind kind = ValueKind::closed;
    std::vector<std::string> values;  // closed kind only
};

class Ontology {
  public:
    static Ontology load(const std::string& path);
    static Ontology from_json_text(const std::string& text);

    bool has_domain(const std::string& domain) const;
    bool has_slot(const std::string& domain, const std::string& slot) const;
    const SlotSpec* slot_spec(const std::string& domain, const std::string& slot) const;

    std::vector<std::string> domain_names() const;
    std::vector<std::pair<std::string, std::string>> slot_keys() const;
    size_t slot_count() const;

    // lowercase + synonym + time normalization; empty result means the
    // surface does not normalize to an admissible value for this slot
    std::string normalize_value(const std::string& domain, const std::string& slot,
                                const std::string& surface) const;

    // throws std::invalid_argument describing the first violation
    void validate(const StructuredState& state) const;

    const std::map<std::string, std::string>& synonyms() const { return synonyms_; }
    // (domain, slot) -> surface trigger phrase used when realizing utterances
    const std::map<std::pair<std::string, std::string>, std::string>& slot_patterns() const {
        return slot_patterns_;
    }
    // taskmaster segment label -> (domain, slot)
    const std::map<std::string, std::pair<std::string, std::string>>& taskmaster_labels() const {
        return taskmaster_labels_;
    }

  private:
    std::map<std::string, std::map<std::string, SlotSpec>> domains_;
    std::map<std::string, std::string> synonyms_;
    std::map<std::pair<std::string, std::string>, std::string> slot_patterns_;
    std::map<std::string, std::pair<std::string, std::string>> taskmaster_labels_;
};

}  // namespace nldst
