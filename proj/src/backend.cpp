#include "nldst/backend.hpp"

#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "nldst/text.hpp"

namespace nldst {

using nlohmann::json;

void BackendSpec::check() const {
    if (kind == BackendKind::external_http && endpoint.empty())
        throw std::invalid_argument("external_http backend requires an endpoint");
    if (timeout_s <= 0) throw std::invalid_argument("timeout must be positive");
    if (max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
}

std::string render_prompt(const DialogueHistory& history) {
    std::string out;
    for (size_t i = 0; i < history.turns.size(); ++i) {
        if (i) out += " <sep> ";
        const Turn& t = history.turns[i];
        out += t.speaker == Speaker::user ? "user:" : "system:";
        for (const Token& tok : t.utterance) out += " " + tok;
    }
    out += " state:";
    return out;
}

std::string turn_request_id(const DialogueHistory& history) {
    return history.dialogue_id + "#" + std::to_string(history.turns.back().turn_index);
}

HttpBackend::HttpBackend(const BackendSpec& spec) : spec_(spec) { spec_.check(); }

GenerationResponse HttpBackend::generate(const GenerationRequest& request) {
    json body{{"prompt", request.prompt},
              {"max_tokens", request.max_tokens},
              {"top_p", request.top_p},
              {"stop", request.stop},
              {"request_id", request.request_id}};
    std::string payload = body.dump();

    int backoff = spec_.backoff_ms;
    for (int attempt = 0; attempt <= spec_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
            backoff *= 2;
        }
        httplib::Client client(spec_.endpoint);
        client.set_connection_timeout(std::chrono::duration<double>(spec_.timeout_s));
        client.set_read_timeout(std::chrono::duration<double>(spec_.timeout_s));
        if (!spec_.bearer_token.empty()) client.set_bearer_token_auth(spec_.bearer_token);
        auto res = client.Post("/generate", payload, "application/json");
        if (!res || res->status != 200) continue;
        try {
            json j = json::parse(res->body);
            GenerationResponse out;
            out.request_id = j.at("request_id").get<std::string>();
            if (out.request_id != request.request_id) continue;  // echo mismatch, retry
            std::string reason = j.value("finish_reason", "stop");
            out.finish_reason = reason == "stop"     ? FinishReason::stop
                                : reason == "length" ? FinishReason::length
                                                     : FinishReason::error;
            if (out.finish_reason != FinishReason::error)
                out.text = j.at("text").get<std::string>();
            return out;
        } catch (const json::exception&) {
            continue;
        }
    }
    return {request.request_id, "", FinishReason::error};
}

CannedBackend CannedBackend::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open canned-response file: " + path);
    json j = json::parse(in);
    std::map<std::string, std::string> responses;
    for (const auto& [id, text] : j.items()) responses[id] = text.get<std::string>();
    return CannedBackend(std::move(responses));
}

GenerationResponse CannedBackend::generate(const GenerationRequest& request) {
    auto it = responses_.find(request.request_id);
    if (it == responses_.end()) return {request.request_id, "", FinishReason::error};
    return {request.request_id, it->second, FinishReason::stop};
}

OracleBackend::OracleBackend(const Corpus& corpus) {
    for (const auto& ex : corpus.examples)
        gold_texts_[turn_request_id(ex.history)] = join_tokens(ex.gold_nl);
}

GenerationResponse OracleBackend::generate(const GenerationRequest& request) {
    auto it = gold_texts_.find(request.request_id);
    if (it == gold_texts_.end()) return {request.request_id, "", FinishReason::error};
    return {request.request_id, it->second, FinishReason::stop};
}

std::vector<Token> linearize_structured(const StructuredState& state) {
    std::vector<Token> out;
    bool first = true;
    for (const SlotValue& sv : state.entries()) {
        if (!first) out.push_back(";");
        first = false;
        out.push_back(sv.domain);
        out.push_back("-");
        out.push_back(sv.slot);
        out.push_back(":");
        auto value_tokens = tokenize(sv.value);
        out.insert(out.end(), value_tokens.begin(), value_tokens.end());
    }
    return out;
}

namespace {

// one record: domain "-" slot ":" value-tokens
bool parse_structured_entry(const std::vector<Token>& tokens, size_t begin, size_t end,
                            const Ontology& ontology, StructuredState& out) {
    if (end - begin < 5) return false;
    const std::string& domain = tokens[begin];
    if (tokens[begin + 1] != "-") return false;
    const std::string& slot = tokens[begin + 2];
    if (tokens[begin + 3] != ":") return false;
    std::vector<Token> value_tokens(tokens.begin() + static_cast<long>(begin + 4),
                                    tokens.begin() + static_cast<long>(end));
    if (value_tokens.empty()) return false;
    if (!ontology.has_slot(domain, slot)) return false;
    std::string value = ontology.normalize_value(domain, slot, join_tokens(value_tokens));
    if (value.empty()) return false;
    out.set(domain, slot, value);
    return true;
}

}  // namespace

std::optional<StructuredState> parse_structured_tokens(const std::vector<Token>& tokens,
                                                       const Ontology& ontology) {
    StructuredState state;
    if (tokens.empty()) return state;
    size_t begin = 0;
    for (size_t i = 0; i <= tokens.size(); ++i) {
        if (i == tokens.size() || tokens[i] == ";") {
            if (!parse_structured_entry(tokens, begin, i, ontology, state)) return std::nullopt;
            begin = i + 1;
        }
    }
    return state;
}

std::optional<StructuredState> parse_structured_text(const std::string& text,
                                                     const Ontology& ontology) {
    StructuredState state;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<Token> tokens = tokenize(line);
        if (tokens.empty()) continue;
        if (!parse_structured_entry(tokens, 0, tokens.size(), ontology, state))
            return std::nullopt;
    }
    return state;
}

StateGenerator::StateGenerator(BackendSpec spec, const Ontology& ontology, const RuleSet& rules)
    : spec_(std::move(spec)), ontology_(ontology), rules_(rules) {
    spec_.check();
}

TurnPrediction StateGenerator::generate_state(const DialogueHistory& history,
                                              const DecodeConfig& decode_cfg,
                                              std::vector<std::string>* failure_log) const {
    TurnPrediction pred;
    pred.dialogue_id = history.dialogue_id;
    pred.turn_index = history.turns.back().turn_index;

    std::vector<Token> generated;
    if (spec_.kind == BackendKind::ngram_local) {
        if (!model_) throw std::logic_error("ngram_local backend has no bound model");
        generated = decode(*model_, history, decode_cfg).tokens;
    } else {
        if (!backend_) throw std::logic_error("backend not bound");
        GenerationRequest req;
        req.prompt = render_prompt(history);
        req.max_tokens = decode_cfg.max_len;
        req.top_p = decode_cfg.nucleus_p;
        req.stop = {"<eos>"};
        req.request_id = turn_request_id(history);
        GenerationResponse res = backend_->generate(req);
        if (res.finish_reason == FinishReason::error || res.request_id != req.request_id) {
            pred.error = true;
            if (failure_log)
                failure_log->push_back("backend error for " + req.request_id);
            return pred;  // empty state, run continues
        }
        generated = tokenize(res.text);
    }

    if (spec_.output_mode == OutputMode::natural_language) {
        pred.predicted_nl = generated;
        pred.predicted_structured = canonicalize(generated, ontology_, rules_);
    } else {
        auto parsed = parse_structured_tokens(generated, ontology_);
        if (parsed) {
            pred.predicted_structured = *parsed;
        } else if (failure_log) {
            failure_log->push_back("structured parse failure for " + turn_request_id(history));
        }
    }
    return pred;
}

}  // namespace nldst
