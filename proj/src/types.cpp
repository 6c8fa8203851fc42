#include "nldst/types.hpp"

namespace nldst {

bool DialogueHistory::valid() const {
    if (turns.empty()) return false;
    bool has_user = false;
    for (size_t i = 0; i < turns.size(); ++i) {
        if (turns[i].turn_index != static_cast<int>(i)) return false;
        if (turns[i].speaker == Speaker::user) has_user = true;
    }
    return has_user;
}

void StructuredState::set(const std::string& domain, const std::string& slot,
                          const std::string& value) {
    if (domain.empty() || slot.empty() || value.empty())
        throw std::invalid_argument("SlotValue fields must be non-empty");
    entries_[{domain, slot}] = value;
}

std::optional<std::string> StructuredState::get(const std::string& domain,
                                                const std::string& slot) const {
    auto it = entries_.find({domain, slot});
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

bool StructuredState::contains_domain(const std::string& domain) const {
    auto it = entries_.lower_bound({domain, ""});
    return it != entries_.end() && it->first.first == domain;
}

std::vector<SlotValue> StructuredState::entries() const {
    std::vector<SlotValue> out;
    out.reserve(entries_.size());
    for (const auto& [key, value] : entries_) out.push_back({key.first, key.second, value});
    return out;
}

StructuredState StructuredState::restrict_to(const std::string& domain) const {
    StructuredState out;
    for (const auto& [key, value] : entries_)
        if (key.first == domain) out.set(key.first, key.second, value);
    return out;
}

std::string split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::dev: return "dev";
        case Split::test: return "test";
    }
    return "train";
}

}  // namespace nldst
