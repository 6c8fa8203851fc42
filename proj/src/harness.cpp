#include "nldst/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "nldst/ingestion.hpp"
#include "nldst/lm.hpp"
#include "nldst/noise.hpp"
#include "nldst/rng.hpp"
#include "nldst/rule_dst.hpp"
#include "nldst/text.hpp"

namespace nldst {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string kind_name(BackendKind k) {
    switch (k) {
        case BackendKind::external_http: return "external_http";
        case BackendKind::mock_oracle: return "mock_oracle";
        case BackendKind::mock_canned: return "mock_canned";
        case BackendKind::ngram_local: return "ngram_local";
    }
    return "mock_canned";
}

BackendKind kind_from(const std::string& s) {
    if (s == "external_http") return BackendKind::external_http;
    if (s == "mock_oracle") return BackendKind::mock_oracle;
    if (s == "mock_canned") return BackendKind::mock_canned;
    if (s == "ngram_local") return BackendKind::ngram_local;
    throw ConfigError("unknown backend kind: " + s);
}

std::string strategy_name(DecodeStrategy s) {
    switch (s) {
        case DecodeStrategy::greedy: return "greedy";
        case DecodeStrategy::beam: return "beam";
        case DecodeStrategy::nucleus: return "nucleus";
    }
    return "greedy";
}

DecodeStrategy strategy_from(const std::string& s) {
    if (s == "greedy") return DecodeStrategy::greedy;
    if (s == "beam") return DecodeStrategy::beam;
    if (s == "nucleus") return DecodeStrategy::nucleus;
    throw ConfigError("unknown decode strategy: " + s);
}

json entries_json(const StructuredState& state) {
    json out = json::array();
    for (const SlotValue& sv : state.entries())
        out.push_back({{"domain", sv.domain}, {"slot", sv.slot}, {"value", sv.value}});
    return out;
}

StructuredState entries_from_json(const json& j) {
    StructuredState s;
    for (const auto& e : j)
        s.set(e.at("domain").get<std::string>(), e.at("slot").get<std::string>(),
              e.at("value").get<std::string>());
    return s;
}

json report_json(const MetricReport& r) {
    json per_domain = json::object();
    for (const auto& [d, s] : r.per_domain)
        per_domain[d] = {{"jga", s.jga}, {"slot_accuracy", s.slot_accuracy},
                         {"n_turns", s.n_turns}};
    return {{"jga", r.jga},       {"slot_accuracy", r.slot_accuracy},
            {"bleu", r.bleu},     {"rouge_1", r.rouge_1},
            {"rouge_2", r.rouge_2}, {"rouge_l", r.rouge_l},
            {"per_domain", per_domain}, {"n_turns", r.n_turns}};
}

MetricReport report_from_json(const json& j) {
    MetricReport r;
    r.jga = j.at("jga").get<double>();
    r.slot_accuracy = j.at("slot_accuracy").get<double>();
    r.bleu = j.at("bleu").get<double>();
    r.rouge_1 = j.at("rouge_1").get<double>();
    r.rouge_2 = j.at("rouge_2").get<double>();
    r.rouge_l = j.at("rouge_l").get<double>();
    r.n_turns = j.at("n_turns").get<size_t>();
    for (const auto& [d, s] : j.at("per_domain").items())
        r.per_domain[d] = {s.at("jga").get<double>(), s.at("slot_accuracy").get<double>(),
                           s.at("n_turns").get<size_t>()};
    return r;
}

template <typename F>
std::vector<TurnPrediction> map_predictions(const Corpus& corpus, F&& f) {
    size_t n = corpus.examples.size();
    std::vector<TurnPrediction> out(n);
    unsigned workers =
        std::min<unsigned>(8, std::max<unsigned>(1, std::thread::hardware_concurrency()));
    std::atomic<size_t> next{0};
    auto work = [&] {
        for (size_t i; (i = next.fetch_add(1)) < n;) out[i] = f(corpus.examples[i]);
    };
    std::vector<std::thread> threads;
    for (unsigned w = 1; w < workers; ++w) threads.emplace_back(work);
    work();
    for (auto& t : threads) t.join();
    return out;
}

}  // namespace

uint64_t file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file for hashing: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return fnv1a64(ss.str());
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    ExperimentConfig c;
    c.corpus_path = j.value("corpus_path", "");
    if (j.contains("synthetic")) {
        c.synthetic_dialogues = j["synthetic"].value("dialogues", 100);
        c.synthetic_seed = j["synthetic"].value("seed", uint64_t{7});
    }
    c.ontology_path = j.value("ontology", "");
    c.template_path = j.value("templates", "");
    c.rule_path = j.value("rules", "");
    c.system = j.value("system", "rule_dst");
    if (j.contains("backend")) {
        const json& b = j["backend"];
        c.backend.kind = kind_from(b.value("kind", "mock_canned"));
        c.backend.endpoint = b.value("endpoint", "");
        c.backend.timeout_s = b.value("timeout_s", 5.0);
        c.backend.max_retries = b.value("max_retries", 2);
        c.backend.backoff_ms = b.value("backoff_ms", 50);
        c.backend.output_mode = b.value("output_mode", "natural_language") == "structured"
                                    ? OutputMode::structured
                                    : OutputMode::natural_language;
        c.backend.bearer_token = b.value("bearer_token", "");
    }
    c.canned_responses_path = j.value("canned_responses", "");
    if (j.contains("decode")) {
        const json& d = j["decode"];
        c.decode.strategy = strategy_from(d.value("strategy", "greedy"));
        c.decode.beam_width = d.value("beam_width", 4);
        c.decode.nucleus_p = d.value("nucleus_p", 0.9);
        c.decode.max_len = d.value("max_len", 64);
        c.decode.seed = d.value("seed", uint64_t{0});
        c.decode.length_penalty = d.value("length_penalty", 0.0);
    }
    if (j.contains("ngram")) {
        c.ngram_order = j["ngram"].value("order", 2);
        if (j["ngram"].contains("lambdas"))
            c.lambdas = j["ngram"]["lambdas"].get<std::vector<double>>();
    }
    if (j.contains("noise")) {
        if (j["noise"].contains("levels"))
            c.noise_levels = j["noise"]["levels"].get<std::vector<double>>();
        c.noise_seed = j["noise"].value("seed", uint64_t{0});
    }
    if (j.contains("split")) {
        if (j["split"].contains("ratios")) {
            auto r = j["split"]["ratios"].get<std::vector<double>>();
            if (r.size() != 3) throw ConfigError("split.ratios must have 3 entries");
            c.split_ratios = {r[0], r[1], r[2]};
        }
        c.split_seed = j["split"].value("seed", uint64_t{0});
    }
    c.output_dir = j.value("output_dir", "");
    return c;
}

std::string ExperimentConfig::canonical_json() const {
    json j;
    j["corpus_path"] = corpus_path;
    j["synthetic"] = {{"dialogues", synthetic_dialogues}, {"seed", synthetic_seed}};
    j["ontology"] = ontology_path;
    j["templates"] = template_path;
    j["rules"] = rule_path;
    j["system"] = system;
    j["backend"] = {{"kind", kind_name(backend.kind)},
                    {"endpoint", backend.endpoint},
                    {"timeout_s", backend.timeout_s},
                    {"max_retries", backend.max_retries},
                    {"backoff_ms", backend.backoff_ms},
                    {"output_mode", backend.output_mode == OutputMode::structured
                                        ? "structured"
                                        : "natural_language"},
                    {"bearer_token", backend.bearer_token}};
    j["canned_responses"] = canned_responses_path;
    j["decode"] = {{"strategy", strategy_name(decode.strategy)},
                   {"beam_width", decode.beam_width},
                   {"nucleus_p", decode.nucleus_p},
                   {"max_len", decode.max_len},
                   {"seed", decode.seed},
                   {"length_penalty", decode.length_penalty}};
    j["ngram"] = {{"order", ngram_order}, {"lambdas", lambdas}};
    j["noise"] = {{"levels", noise_levels}, {"seed", noise_seed}};
    j["split"] = {{"ratios", std::vector<double>{split_ratios[0], split_ratios[1],
                                                 split_ratios[2]}},
                  {"seed", split_seed}};
    j["output_dir"] = output_dir;
    return j.dump(2);
}

std::string ExperimentConfig::hash() const { return hex64(fnv1a64(canonical_json())); }

void ExperimentConfig::check() const {
    if (system != "rule_dst" && system != "ngram_nl" && system != "ngram_structured_ablation" &&
        system != "external_backend")
        throw ConfigError("unknown system under test: " + system);
    for (const std::string& p : {ontology_path, template_path, rule_path})
        if (p.empty() || !fs::exists(p)) throw ConfigError("missing required file: " + p);
    if (!corpus_path.empty() && !fs::exists(corpus_path))
        throw ConfigError("corpus file does not exist: " + corpus_path);
    for (double r : noise_levels)
        if (r < 0.0 || r > 1.0) throw ConfigError("noise level out of [0,1]");
    if (noise_levels.empty()) throw ConfigError("at least one noise level required");
    if (corpus_path.empty() && synthetic_dialogues < 1)
        throw ConfigError("synthetic dialogue count must be >= 1");
    try {
        decode.check();
        if (system == "external_backend") backend.check();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (system == "external_backend" && backend.kind == BackendKind::mock_canned &&
        canned_responses_path.empty())
        throw ConfigError("mock_canned backend requires canned_responses");
}

Corpus generate_synthetic_corpus(const Ontology& ontology, const TemplateSet& templates,
                                 int n_dialogues, uint64_t seed) {
    if (n_dialogues < 1) throw std::invalid_argument("n_dialogues must be >= 1");
    auto slot_keys = ontology.slot_keys();
    if (slot_keys.empty()) throw std::invalid_argument("empty ontology");
    templates.validate_against(ontology);

    Corpus corpus;
    corpus.name = "synthetic";
    Rng rng(seed);
    for (int d = 0; d < n_dialogues; ++d) {
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "syn-%05d", d);
        std::string dialogue_id = idbuf;

        int n_user_turns = 1 + static_cast<int>(rng.below(4));
        DialogueHistory history;
        history.dialogue_id = dialogue_id;
        StructuredState cumulative;
        int turn_index = 0;
        for (int t = 0; t < n_user_turns; ++t) {
            int n_new = 1 + static_cast<int>(rng.below(2));
            StructuredState fresh;
            for (int k = 0; k < n_new; ++k) {
                const auto& [domain, slot] = slot_keys[rng.below(slot_keys.size())];
                const SlotSpec* spec = ontology.slot_spec(domain, slot);
                std::string value;
                if (spec->kind == ValueKind::time) {
                    // small fixed pool keeps the synthetic value distribution
                    // dense enough for sequence models to learn from
                    static const char* times[] = {"08:00", "09:30", "11:15",
                                                  "14:00", "17:30", "21:45"};
                    value = times[rng.below(6)];
                } else {
                    value = spec->values[rng.below(spec->values.size())];
                }
                fresh.set(domain, slot, value);
            }
            // realize an utterance the rule baseline can parse
            std::string utterance = "i need";
            std::string prev_domain;
            for (const SlotValue& sv : fresh.entries()) {
                if (sv.domain != prev_domain) {
                    utterance += (prev_domain.empty() ? " a " : " and a ") + sv.domain;
                    prev_domain = sv.domain;
                }
                auto pat = ontology.slot_patterns().find({sv.domain, sv.slot});
                if (pat == ontology.slot_patterns().end())
                    throw std::invalid_argument("no slot pattern for " + sv.domain + "-" + sv.slot);
                utterance += " " + pat->second + " " + sv.value;
                cumulative.set(sv);
            }

            Turn user;
            user.speaker = Speaker::user;
            user.utterance = tokenize(utterance);
            user.turn_index = turn_index++;
            history.turns.push_back(user);

            AnnotatedTurnExample ex;
            ex.history = history;
            ex.gold_structured = cumulative;
            ex.gold_nl = verbalize(cumulative, templates);
            corpus.examples.push_back(std::move(ex));

            if (t + 1 < n_user_turns) {
                Turn system;
                system.speaker = Speaker::system;
                system.utterance = tokenize("ok anything else");
                system.turn_index = turn_index++;
                history.turns.push_back(system);
            }
        }
    }
    return corpus;
}

RunRecord run_experiment(const ExperimentConfig& config) {
    auto start = std::chrono::steady_clock::now();
    config.check();

    Ontology ontology = Ontology::load(config.ontology_path);
    TemplateSet templates = TemplateSet::load(config.template_path);
    templates.validate_against(ontology);
    RuleSet rules = RuleSet::load(config.rule_path);

    Corpus corpus = config.corpus_path.empty()
                        ? generate_synthetic_corpus(ontology, templates,
                                                    config.synthetic_dialogues,
                                                    config.synthetic_seed)
                        : load_canonical(config.corpus_path, ontology, templates, "corpus",
                                         Split::train);
    SplitResult splits = split_corpus(corpus, config.split_ratios, config.split_seed);
    const Corpus& train = splits.train.examples.empty() ? corpus : splits.train;
    const Corpus& test = splits.test.examples.empty() ? corpus : splits.test;

    // replacement pool: training-side vocabulary, markers excluded
    std::set<Token> pool_set;
    for (const auto& ex : train.examples) {
        for (const Turn& t : ex.history.turns)
            for (const Token& tok : t.utterance) pool_set.insert(tok);
        for (const Token& tok : ex.gold_nl) pool_set.insert(tok);
    }
    std::vector<Token> pool(pool_set.begin(), pool_set.end());

    std::shared_ptr<const NGramModel> model;
    if (config.system == "ngram_nl") {
        model = std::make_shared<NGramModel>(fit(train, config.ngram_order, config.lambdas));
    } else if (config.system == "ngram_structured_ablation") {
        // same training examples, targets linearized as structured records
        Corpus ablation_train = train;
        for (auto& ex : ablation_train.examples)
            ex.gold_nl = linearize_structured(ex.gold_structured);
        model = std::make_shared<NGramModel>(
            fit(ablation_train, config.ngram_order, config.lambdas));
    }

    std::shared_ptr<Backend> backend;
    BackendSpec spec = config.backend;
    if (config.system == "rule_dst") {
        spec.kind = BackendKind::mock_canned;  // unused
    } else if (config.system == "ngram_nl") {
        spec.kind = BackendKind::ngram_local;
        spec.output_mode = OutputMode::natural_language;
    } else if (config.system == "ngram_structured_ablation") {
        spec.kind = BackendKind::ngram_local;
        spec.output_mode = OutputMode::structured;
    } else {
        switch (spec.kind) {
            case BackendKind::mock_oracle:
                backend = std::make_shared<OracleBackend>(test);
                break;
            case BackendKind::mock_canned:
                backend = std::make_shared<CannedBackend>(
                    CannedBackend::load(config.canned_responses_path));
                break;
            case BackendKind::external_http:
                backend = std::make_shared<HttpBackend>(spec);
                break;
            case BackendKind::ngram_local:
                throw ConfigError("external_backend system cannot use kind ngram_local");
        }
    }

    RuleDstConfig rule_cfg{rules};
    StateGenerator generator(spec, ontology, rules);
    if (model) generator.bind_model(model);
    if (backend) generator.bind_backend(backend);

    RunRecord record;
    record.system = config.system;
    record.config_hash = config.hash();
    record.file_hashes = {{"ontology", hex64(file_hash(config.ontology_path))},
                          {"templates", hex64(file_hash(config.template_path))},
                          {"rules", hex64(file_hash(config.rule_path))}};

    std::ostringstream predictions_log;
    for (double rate : config.noise_levels) {
        NoiseConfig noise{rate, pool, config.noise_seed};
        Corpus noisy = inject_noise_corpus(test, noise);

        std::vector<TurnPrediction> preds;
        if (config.system == "rule_dst") {
            preds = map_predictions(noisy, [&](const AnnotatedTurnExample& ex) {
                TurnPrediction p;
                p.dialogue_id = ex.history.dialogue_id;
                p.turn_index = ex.history.turns.back().turn_index;
                p.predicted_structured = track(ex.history, ontology, rule_cfg);
                return p;
            });
        } else {
            preds = map_predictions(noisy, [&](const AnnotatedTurnExample& ex) {
                return generator.generate_state(ex.history, config.decode);
            });
        }

        NoiseLevelReport level;
        level.rate = rate;
        level.report = compute_report(preds, test, ontology);
        record.reports.push_back(level);

        for (size_t i = 0; i < preds.size(); ++i) {
            const TurnPrediction& p = preds[i];
            json line{{"noise_rate", rate},
                      {"dialogue_id", p.dialogue_id},
                      {"turn_index", p.turn_index},
                      {"predicted", entries_json(p.predicted_structured)},
                      {"predicted_text",
                       p.predicted_nl ? json(join_tokens(*p.predicted_nl)) : json(nullptr)},
                      {"gold", entries_json(test.examples[i].gold_structured)},
                      {"error", p.error}};
            predictions_log << line.dump() << "\n";
        }
    }

    record.duration_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (!config.output_dir.empty()) {
        fs::create_directories(fs::path(config.output_dir) / "tables");
        std::ofstream(fs::path(config.output_dir) / "config.copy") << config.canonical_json()
                                                                   << "\n";
        record.predictions_path =
            (fs::path(config.output_dir) / "predictions.log").string();
        std::ofstream(record.predictions_path) << predictions_log.str();
        std::ofstream(fs::path(config.output_dir) / "run.record") << record.to_json_text()
                                                                  << "\n";
        std::ofstream(fs::path(config.output_dir) / "tables" / "main.txt")
            << render_report({record}, ReportLayout::main);
        std::ofstream(fs::path(config.output_dir) / "tables" / "per_domain.txt")
            << render_report({record}, ReportLayout::per_domain);
        if (record.reports.size() > 1)
            std::ofstream(fs::path(config.output_dir) / "tables" / "noise.txt")
                << render_report({record}, ReportLayout::noise);
    }
    return record;
}

std::string RunRecord::to_json_text() const {
    json levels = json::array();
    for (const auto& l : reports) levels.push_back({{"rate", l.rate},
                                                    {"report", report_json(l.report)}});
    json j{{"system", system},
           {"config_hash", config_hash},
           {"file_hashes", file_hashes},
           {"reports", levels},
           {"predictions_path", predictions_path},
           {"duration_s", duration_s},
           {"version", version}};
    return j.dump(2);
}

RunRecord RunRecord::from_json_text(const std::string& text) {
    json j = json::parse(text);
    RunRecord r;
    r.system = j.at("system").get<std::string>();
    r.config_hash = j.at("config_hash").get<std::string>();
    for (const auto& [k, v] : j.at("file_hashes").items()) r.file_hashes[k] = v.get<std::string>();
    for (const auto& l : j.at("reports"))
        r.reports.push_back({l.at("rate").get<double>(), report_from_json(l.at("report"))});
    r.predictions_path = j.value("predictions_path", "");
    r.duration_s = j.value("duration_s", 0.0);
    r.version = j.value("version", "");
    return r;
}

namespace {

std::string fmt_pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

std::string fmt_score(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
    std::vector<size_t> widths(header.size());
    for (size_t c = 0; c < header.size(); ++c) widths[c] = header[c].size();
    for (const auto& row : rows)
        for (size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
    std::ostringstream out;
    auto emit_row = [&](const std::vector<std::string>& row) {
        for (size_t c = 0; c < row.size(); ++c) {
            if (c) out << "  ";
            out << row[c];
            for (size_t pad = row[c].size(); pad < widths[c]; ++pad) out << ' ';
        }
        out << "\n";
    };
    emit_row(header);
    std::vector<std::string> rule;
    for (size_t w : widths) rule.push_back(std::string(w, '-'));
    emit_row(rule);
    for (const auto& row : rows) emit_row(row);
    return out.str();
}

const std::vector<std::string> kDomainOrder = {"restaurant", "hotel", "attraction", "taxi",
                                               "train", "hospital", "police"};

}  // namespace

std::string render_report(const std::vector<RunRecord>& records, ReportLayout layout) {
    if (records.empty()) throw std::invalid_argument("no records to render");
    for (const auto& r : records)
        if (r.reports.empty()) throw std::invalid_argument("record with no reports");

    switch (layout) {
        case ReportLayout::main: {
            std::vector<std::vector<std::string>> rows;
            for (const auto& r : records) {
                const MetricReport& m = r.reports.front().report;
                rows.push_back({r.system, fmt_pct(m.jga), fmt_pct(m.slot_accuracy),
                                fmt_score(m.bleu), fmt_score(m.rouge_1), fmt_score(m.rouge_2),
                                fmt_score(m.rouge_l)});
            }
            return render_table({"Method", "JGA (%)", "Slot Acc. (%)", "BLEU", "ROUGE-1",
                                 "ROUGE-2", "ROUGE-L"},
                                rows);
        }
        case ReportLayout::ablation: {
            std::vector<std::vector<std::string>> rows;
            for (const auto& r : records) {
                const MetricReport& m = r.reports.front().report;
                rows.push_back({r.system, fmt_pct(m.jga), fmt_pct(m.slot_accuracy)});
            }
            return render_table({"Method", "JGA (%)", "Slot Acc. (%)"}, rows);
        }
        case ReportLayout::per_domain: {
            std::vector<std::string> header{"Domain"};
            for (const auto& r : records) {
                header.push_back(r.system + " JGA (%)");
                header.push_back(r.system + " Slot Acc. (%)");
            }
            std::vector<std::string> domains;
            for (const std::string& d : kDomainOrder)
                for (const auto& r : records)
                    if (r.reports.front().report.per_domain.count(d) &&
                        std::find(domains.begin(), domains.end(), d) == domains.end())
                        domains.push_back(d);
            for (const auto& r : records)
                for (const auto& [d, _] : r.reports.front().report.per_domain)
                    if (std::find(domains.begin(), domains.end(), d) == domains.end())
                        domains.push_back(d);
            std::vector<std::vector<std::string>> rows;
            for (const std::string& d : domains) {
                std::vector<std::string> row{d};
                for (const auto& r : records) {
                    auto it = r.reports.front().report.per_domain.find(d);
                    if (it == r.reports.front().report.per_domain.end()) {
                        row.push_back("-");
                        row.push_back("-");
                    } else {
                        row.push_back(fmt_pct(it->second.jga));
                        row.push_back(fmt_pct(it->second.slot_accuracy));
                    }
                }
                rows.push_back(row);
            }
            return render_table(header, rows);
        }
        case ReportLayout::noise: {
            const auto& levels = records.front().reports;
            std::vector<std::string> header{"Method"};
            for (const auto& l : levels) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%g%% Noise (JGA)", l.rate * 100.0);
                header.push_back(buf);
            }
            std::vector<std::vector<std::string>> rows;
            for (const auto& r : records) {
                if (r.reports.size() != levels.size())
                    throw std::invalid_argument("records with mismatched noise sweeps");
                std::vector<std::string> row{r.system};
                for (const auto& l : r.reports) row.push_back(fmt_pct(l.report.jga));
                rows.push_back(row);
            }
            return render_table(header, rows);
        }
    }
    throw std::logic_error("unknown report layout");
}

}  // namespace nldst
