#pragma once

#include <string>
#include <vector>

#include "nldst/ontology.hpp"
#include "nldst/types.hpp"
#include "nldst/verbalizer.hpp"

namespace nldst {

struct SkipEntry {
    std::string reason;
    std::string dialogue_id;
    std::string fragment;
};

struct SkipReport {
    std::vector<SkipEntry> entries;

    void add(std::string reason, std::string dialogue_id, std::string fragment) {
        entries.push_back({std::move(reason), std::move(dialogue_id), std::move(fragment)});
    }
    void write(const std::string& path) const;
};

// Canonical corpus interchange format: one dialogue per JSONL line with
// fields {dialogue_id, turns:[{speaker,text}], states:[{turn_index,
// entries:[{domain,slot,value}]}]}. UTF-8.
void write_corpus(const Corpus& corpus, const std::string& path);

Corpus load_canonical(const std::string& path, const Ontology& ontology,
                      const TemplateSet& templates, const std::string& name, Split split);

}  // namespace nldst
