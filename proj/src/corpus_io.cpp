#include "nldst/corpus_io.hpp"

#include <fstream>
#include <map>

#include "json.hpp"
#include "nldst/text.hpp"

namespace nldst {

using nlohmann::json;

void SkipReport::write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open skip report for writing: " + path);
    for (const auto& e : entries) {
        json j{{"reason", e.reason}, {"dialogue_id", e.dialogue_id}, {"fragment", e.fragment}};
        out << j.dump() << "\n";
    }
}

void write_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open corpus for writing: " + path);

    // group by dialogue in first-appearance order; the longest history
    // carries the full turn list
    std::vector<std::string> order;
    std::map<std::string, const AnnotatedTurnExample*> longest;
    std::map<std::string, std::vector<const AnnotatedTurnExample*>> by_id;
    for (const auto& ex : corpus.examples) {
        const std::string& id = ex.history.dialogue_id;
        if (!by_id.count(id)) order.push_back(id);
        by_id[id].push_back(&ex);
        auto& best = longest[id];
        if (!best || ex.history.turns.size() > best->history.turns.size()) best = &ex;
    }

    for (const std::string& id : order) {
        json turns = json::array();
        for (const Turn& t : longest[id]->history.turns)
            turns.push_back({{"speaker", t.speaker == Speaker::user ? "user" : "system"},
                             {"text", join_tokens(t.utterance)}});
        json states = json::array();
        for (const AnnotatedTurnExample* ex : by_id[id]) {
            json entries = json::array();
            for (const SlotValue& sv : ex->gold_structured.entries())
                entries.push_back({{"domain", sv.domain}, {"slot", sv.slot}, {"value", sv.value}});
            states.push_back({{"turn_index", ex->history.turns.back().turn_index},
                              {"entries", entries}});
        }
        json line{{"dialogue_id", id}, {"turns", turns}, {"states", states}};
        out << line.dump() << "\n";
    }
}

Corpus load_canonical(const std::string& path, const Ontology& ontology,
                      const TemplateSet& templates, const std::string& name, Split split) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus file: " + path);
    Corpus corpus;
    corpus.name = name;
    corpus.split = split;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw std::runtime_error("corpus parse error at line " + std::to_string(lineno) +
                                     ": " + e.what());
        }
        std::string id = j.at("dialogue_id").get<std::string>();
        DialogueHistory full;
        full.dialogue_id = id;
        int idx = 0;
        for (const auto& t : j.at("turns")) {
            Turn turn;
            turn.speaker =
                t.at("speaker").get<std::string>() == "user" ? Speaker::user : Speaker::system;
            turn.utterance = tokenize(t.at("text").get<std::string>());
            turn.turn_index = idx++;
            full.turns.push_back(std::move(turn));
        }
        for (const auto& s : j.at("states")) {
            int turn_index = s.at("turn_index").get<int>();
            if (turn_index < 0 || turn_index >= static_cast<int>(full.turns.size()))
                throw std::runtime_error("state turn_index out of range in dialogue " + id);
            AnnotatedTurnExample ex;
            ex.history.dialogue_id = id;
            ex.history.turns.assign(full.turns.begin(), full.turns.begin() + turn_index + 1);
            for (const auto& e : s.at("entries"))
                ex.gold_structured.set(e.at("domain").get<std::string>(),
                                       e.at("slot").get<std::string>(),
                                       e.at("value").get<std::string>());
            ontology.validate(ex.gold_structured);
            ex.gold_nl = verbalize(ex.gold_structured, templates);
            corpus.examples.push_back(std::move(ex));
        }
    }
    return corpus;
}

}  // namespace nldst
