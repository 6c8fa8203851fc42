#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nldst/canonicalizer.hpp"
#include "nldst/decoding.hpp"
#include "nldst/lm.hpp"
#include "nldst/metrics.hpp"
#include "nldst/ontology.hpp"
#include "nldst/types.hpp"

namespace nldst {

struct GenerationRequest {
    std::string prompt;  // rendered prompt encoding
    int max_tokens = 64;
    double top_p = 0.9;
    std::vector<std::string> stop;
    std::string request_id;
};

enum class FinishReason { stop, length, error };

struct GenerationResponse {
    std::string request_id;
    std::string text;
    FinishReason finish_reason = FinishReason::stop;
};

enum class BackendKind { external_http, mock_oracle, mock_canned, ngram_local };
enum class OutputMode { natural_language, structured };

struct BackendSpec {
    BackendKind kind = BackendKind::mock_canned;
    std::string endpoint;  // external_http only
    double timeout_s = 5.0;
    int max_retries = 2;
    int backoff_ms = 50;  // doubled per retry
    OutputMode output_mode = OutputMode::natural_language;
    std::string bearer_token;

    void check() const;
};

class Backend {
  public:
    virtual ~Backend() = default;
    virtual GenerationResponse generate(const GenerationRequest& request) = 0;
};

// POSTs the request as a JSON record to the endpoint and verifies the
// echoed request_id; retries with exponential backoff, then degrades to an
// error response so evaluation runs complete.
class HttpBackend : public Backend {
  public:
    explicit HttpBackend(const BackendSpec& spec);
    GenerationResponse generate(const GenerationRequest& request) override;

  private:
    BackendSpec spec_;
};

// Fixture-scripted responses keyed by request_id.
class CannedBackend : public Backend {
  public:
    explicit CannedBackend(std::map<std::string, std::string> responses)
        : responses_(std::move(responses)) {}
    static CannedBackend load(const std::string& path);
    GenerationResponse generate(const GenerationRequest& request) override;

  private:
    std::map<std::string, std::string> responses_;
};

// Pipeline-sanity backend: answers every request with the verbalized gold
// state of that turn.
class OracleBackend : public Backend {
  public:
    explicit OracleBackend(const Corpus& corpus);
    GenerationResponse generate(const GenerationRequest& request) override;

  private:
    std::map<std::string, std::string> gold_texts_;  // request_id -> text
};

std::string render_prompt(const DialogueHistory& history);
std::string turn_request_id(const DialogueHistory& history);

// "domain-slot: value" record grammar shared by the structured wire format
// and the structured-ablation token linearization
std::vector<Token> linearize_structured(const StructuredState& state);
std::optional<StructuredState> parse_structured_tokens(const std::vector<Token>& tokens,
                                                       const Ontology& ontology);
std::optional<StructuredState> parse_structured_text(const std::string& text,
                                                     const Ontology& ontology);

// Adapter that lets any backend (or a local fitted model) play the
// generator role; failures degrade to empty-state predictions.
class StateGenerator {
  public:
    StateGenerator(BackendSpec spec, const Ontology& ontology, const RuleSet& rules);

    void bind_backend(std::shared_ptr<Backend> backend) { backend_ = std::move(backend); }
    void bind_model(std::shared_ptr<const NGramModel> model) { model_ = std::move(model); }

    TurnPrediction generate_state(const DialogueHistory& history, const DecodeConfig& decode_cfg,
                                  std::vector<std::string>* failure_log = nullptr) const;

  private:
    BackendSpec spec_;
    const Ontology& ontology_;
    const RuleSet& rules_;
    std::shared_ptr<Backend> backend_;
    std::shared_ptr<const NGramModel> model_;
};

}  // namespace nldst
