#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nldst/backend.hpp"
#include "nldst/canonicalizer.hpp"
#include "nldst/corpus_io.hpp"
#include "nldst/decoding.hpp"
#include "nldst/metrics.hpp"
#include "nldst/ontology.hpp"
#include "nldst/types.hpp"
#include "nldst/verbalizer.hpp"

namespace nldst {

inline constexpr const char* kToolkitVersion = "0.1.0";

// thrown for bad configuration (exit code 2, vs 3 for runtime contract
// violations)
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string corpus_path;  // empty -> synthetic corpus
    int synthetic_dialogues = 100;
    uint64_t synthetic_seed = 7;

    std::string ontology_path;
    std::string template_path;
    std::string rule_path;

    std::string system = "rule_dst";  // rule_dst | ngram_nl |
                                      // ngram_structured_ablation | external_backend
    BackendSpec backend;
    std::string canned_responses_path;

    DecodeConfig decode;
    int ngram_order = 2;
    std::vector<double> lambdas{0.3, 0.7};

    std::vector<double> noise_levels{0.0};
    uint64_t noise_seed = 0;

    std::array<double, 3> split_ratios{0.8, 0.1, 0.1};
    uint64_t split_seed = 0;

    std::string output_dir;

    static ExperimentConfig load(const std::string& path);
    std::string canonical_json() const;
    std::string hash() const;
    void check() const;
};

struct NoiseLevelReport {
    double rate = 0.0;
    MetricReport report;
};

struct RunRecord {
    std::string system;
    std::string config_hash;
    std::map<std::string, std::string> file_hashes;
    std::vector<NoiseLevelReport> reports;
    std::string predictions_path;
    double duration_s = 0.0;  // excluded from determinism comparisons
    std::string version = kToolkitVersion;

    std::string to_json_text() const;
    static RunRecord from_json_text(const std::string& text);
};

// Samples random ontology states built cumulatively across 1-4 user turns
// per dialogue; utterances are realized from the ontology slot patterns so
// the rule baseline has something to extract, and gold_nl is the
// verbalized gold state. Deterministic per seed.
Corpus generate_synthetic_corpus(const Ontology& ontology, const TemplateSet& templates,
                                 int n_dialogues, uint64_t seed);

// Full sweep: for each noise level, perturb test inputs, produce
// predictions with the selected system, score, persist. Deterministic
// end-to-end for a fixed config.
RunRecord run_experiment(const ExperimentConfig& config);

enum class ReportLayout { main, ablation, per_domain, noise };

std::string render_report(const std::vector<RunRecord>& records, ReportLayout layout);

uint64_t file_hash(const std::string& path);

}  // namespace nldst
