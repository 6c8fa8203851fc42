#pragma once

#include <compare>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nldst/text.hpp"

namespace nldst {

enum class Speaker { user, system };

struct Turn {
    Speaker speaker = Speaker::user;
    std::vector<Token> utterance;
    int turn_index = 0;
};

struct DialogueHistory {
    std::string dialogue_id;
    std::vector<Turn> turns;

    // true when turn indices are consecutive from 0 and at least one user
    // turn is present
    bool valid() const;
};

struct SlotValue {
    std::string domain;
    std::string slot;
    std::string value;

    auto operator<=>(const SlotValue&) const = default;
};

// Set of slot-value entries keyed by (domain, slot); inserting an existing
// key replaces the value.
class StructuredState {
  public:
    void set(const std::string& domain, const std::string& slot, const std::string& value);
    void set(const SlotValue& sv) { set(sv.domain, sv.slot, sv.value); }

    std::optional<std::string> get(const std::string& domain, const std::string& slot) const;
    bool contains_domain(const std::string& domain) const;

    bool empty() const { return entries_.empty(); }
    size_t size() const { return entries_.size(); }

    // entries in (domain, slot) order
    std::vector<SlotValue> entries() const;

    // state restricted to one domain
    StructuredState restrict_to(const std::string& domain) const;

    bool operator==(const StructuredState&) const = default;

  private:
    std::map<std::pair<std::string, std::string>, std::string> entries_;
};

inline bool state_equal(const StructuredState& a, const StructuredState& b) { return a == b; }

// NL state description: plain tokens, no marker symbols
using NLStateDescription = std::vector<Token>;

struct AnnotatedTurnExample {
    DialogueHistory history;  // prefix ending at a user turn
    StructuredState gold_structured;
    NLStateDescription gold_nl;
};

enum class Split { train, dev, test };

std::string split_name(Split s);

struct Corpus {
    std::string name;
    std::vector<AnnotatedTurnExample> examples;
    Split split = Split::train;
};

}  // namespace nldst
