#include "nldst/ingestion.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "json.hpp"
#include "nldst/rng.hpp"
#include "nldst/text.hpp"

namespace nldst {

using nlohmann::json;

namespace {

json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error("malformed dataset file " + path + ": " + e.what());
    }
}

bool is_unset_marker(const std::string& v) {
    return v.empty() || v == "not mentioned" || v == "none";
}

std::string lower(const std::string& s) {
    std::string out;
    for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

}  // namespace

Corpus load_multiwoz(const std::string& path, const Ontology& ontology,
                     const TemplateSet& templates, SkipReport* skips) {
    json archive = parse_file(path);
    if (!archive.is_object())
        throw std::runtime_error("multiwoz archive must be an object of dialogues: " + path);
    Corpus corpus;
    corpus.name = "multiwoz21";

    for (const auto& [dialogue_id, dlg] : archive.items()) {
        if (!dlg.is_object() || !dlg.contains("log") || !dlg["log"].is_array())
            throw std::runtime_error("malformed dialogue (missing log): " + dialogue_id);
        const json& log = dlg["log"];

        DialogueHistory full;
        full.dialogue_id = dialogue_id;
        for (size_t i = 0; i < log.size(); ++i) {
            if (!log[i].contains("text"))
                throw std::runtime_error("malformed turn (missing text) in dialogue: " +
                                         dialogue_id);
            Turn t;
            t.speaker = (i % 2 == 0) ? Speaker::user : Speaker::system;
            t.utterance = tokenize(log[i]["text"].get<std::string>());
            t.turn_index = static_cast<int>(i);
            full.turns.push_back(std::move(t));
        }

        StructuredState last_state;
        for (size_t i = 0; i < log.size(); i += 2) {
            // belief annotation for user turn i lives on system turn i+1
            if (i + 1 < log.size() && log[i + 1].contains("metadata") &&
                log[i + 1]["metadata"].is_object() && !log[i + 1]["metadata"].empty()) {
                StructuredState state;
                for (const auto& [domain, belief] : log[i + 1]["metadata"].items()) {
                    std::string d = lower(domain);
                    if (!ontology.has_domain(d)) {
                        if (skips) skips->add("unknown domain", dialogue_id, domain);
                        continue;
                    }
                    if (!belief.contains("semi") || !belief["semi"].is_object()) continue;
                    for (const auto& [slot, value] : belief["semi"].items()) {
                        std::string s = lower(slot);
                        std::string raw = value.is_string() ? value.get<std::string>() : "";
                        if (is_unset_marker(lower(raw))) continue;
                        if (!ontology.has_slot(d, s)) {
                            if (skips) skips->add("unknown slot", dialogue_id, domain + "-" + slot);
                            continue;
                        }
                        std::string v = ontology.normalize_value(d, s, raw);
                        if (v.empty()) {
                            if (skips)
                                skips->add("unnormalizable value", dialogue_id,
                                           domain + "-" + slot + "=" + raw);
                            continue;
                        }
                        state.set(d, s, v);
                    }
                }
                last_state = state;
            }
            AnnotatedTurnExample ex;
            ex.history.dialogue_id = dialogue_id;
            ex.history.turns.assign(full.turns.begin(), full.turns.begin() + i + 1);
            ex.gold_structured = last_state;
            ex.gold_nl = verbalize(last_state, templates);
            corpus.examples.push_back(std::move(ex));
        }
    }
    return corpus;
}

Corpus load_taskmaster(const std::string& path, const Ontology& ontology,
                       const TemplateSet& templates, SkipReport* skips) {
    json archive = parse_file(path);
    if (!archive.is_array())
        throw std::runtime_error("taskmaster archive must be an array of conversations: " + path);
    Corpus corpus;
    corpus.name = "taskmaster1";

    for (const auto& conv : archive) {
        std::string id = conv.value("conversation_id", "");
        if (id.empty()) throw std::runtime_error("conversation missing conversation_id");
        if (!conv.contains("utterances") || !conv["utterances"].is_array())
            throw std::runtime_error("malformed conversation (missing utterances): " + id);

        DialogueHistory full;
        full.dialogue_id = id;
        StructuredState cumulative;
        int idx = 0;
        for (const auto& utt : conv["utterances"]) {
            Turn t;
            t.speaker = lower(utt.value("speaker", "user")) == "user" ? Speaker::user
                                                                     : Speaker::system;
            t.utterance = tokenize(utt.value("text", ""));
            t.turn_index = idx++;
            full.turns.push_back(t);

            if (t.speaker != Speaker::user) continue;

            if (utt.contains("segments") && utt["segments"].is_array()) {
                for (const auto& seg : utt["segments"]) {
                    std::string surface = seg.value("text", "");
                    if (!seg.contains("annotations")) continue;
                    for (const auto& ann : seg["annotations"]) {
                        std::string label = ann.value("name", "");
                        auto it = ontology.taskmaster_labels().find(label);
                        if (it == ontology.taskmaster_labels().end()) {
                            if (skips) skips->add("unmapped segment label", id, label);
                            continue;
                        }
                        const auto& [domain, slot] = it->second;
                        std::string v = ontology.normalize_value(domain, slot, surface);
                        if (v.empty()) {
                            if (skips)
                                skips->add("unnormalizable value", id, label + "=" + surface);
                            continue;
                        }
                        cumulative.set(domain, slot, v);  // later mentions override
                    }
                }
            }
            AnnotatedTurnExample ex;
            ex.history.dialogue_id = id;
            ex.history.turns = full.turns;
            ex.gold_structured = cumulative;
            ex.gold_nl = verbalize(cumulative, templates);
            corpus.examples.push_back(std::move(ex));
        }
    }
    return corpus;
}

SplitResult split_corpus(const Corpus& corpus, std::array<double, 3> ratios, uint64_t seed) {
    double sum = ratios[0] + ratios[1] + ratios[2];
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("split ratios must sum to 1");
    if (corpus.examples.empty()) throw std::invalid_argument("cannot split an empty corpus");

    std::vector<std::string> ids;
    std::set<std::string> seen;
    for (const auto& ex : corpus.examples)
        if (seen.insert(ex.history.dialogue_id).second) ids.push_back(ex.history.dialogue_id);

    // portable Fisher-Yates
    Rng rng(seed);
    for (size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[rng.below(i)]);

    size_t n = ids.size();
    std::array<size_t, 3> sizes{};
    std::array<double, 3> frac{};
    size_t assigned = 0;
    for (int k = 0; k < 3; ++k) {
        double target = ratios[k] * static_cast<double>(n);
        sizes[k] = static_cast<size_t>(std::floor(target + 1e-9));
        frac[k] = target - static_cast<double>(sizes[k]);
        assigned += sizes[k];
    }
    while (assigned < n) {
        int best = 0;
        for (int k = 1; k < 3; ++k)
            if (frac[k] > frac[best] + 1e-12) best = k;
        ++sizes[best];
        frac[best] = -1.0;
        ++assigned;
    }

    std::map<std::string, int> assignment;
    size_t pos = 0;
    for (int k = 0; k < 3; ++k)
        for (size_t i = 0; i < sizes[k]; ++i) assignment[ids[pos++]] = k;

    SplitResult out;
    out.train.name = corpus.name;
    out.train.split = Split::train;
    out.dev.name = corpus.name;
    out.dev.split = Split::dev;
    out.test.name = corpus.name;
    out.test.split = Split::test;
    for (const auto& ex : corpus.examples) {
        switch (assignment.at(ex.history.dialogue_id)) {
            case 0: out.train.examples.push_back(ex); break;
            case 1: out.dev.examples.push_back(ex); break;
            case 2: out.test.examples.push_back(ex); break;
        }
    }
    return out;
}

}  // namespace nldst
