#pragma once

#include <array>
#include <string>

#include "nldst/corpus_io.hpp"
#include "nldst/ontology.hpp"
#include "nldst/types.hpp"
#include "nldst/verbalizer.hpp"

namespace nldst {

// MultiWOZ-2.1-style archive: map dialogue_id -> {log: [{text, metadata}]}
// where metadata on system turns carries per-domain belief annotations. The
// belief state following a user turn is attributed to that user turn.
// Unknown domains/slots and unset-value markers go to the skip report.
Corpus load_multiwoz(const std::string& path, const Ontology& ontology,
                     const TemplateSet& templates, SkipReport* skips = nullptr);

// Taskmaster-1-style array of conversations with per-utterance segment
// annotations; labels map to (domain, slot) via the ontology's label table
// and the cumulative state is built turn by turn (later mentions override).
Corpus load_taskmaster(const std::string& path, const Ontology& ontology,
                       const TemplateSet& templates, SkipReport* skips = nullptr);

struct SplitResult {
    Corpus train;
    Corpus dev;
    Corpus test;
};

// Dialogues (not turns) assigned to splits by seeded shuffle; sizes by
// floor-then-distribute on the ratios. Deterministic for a fixed seed.
SplitResult split_corpus(const Corpus& corpus, std::array<double, 3> ratios, uint64_t seed);

}  // namespace nldst
