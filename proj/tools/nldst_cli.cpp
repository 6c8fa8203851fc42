#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "nldst/harness.hpp"
#include "nldst/ingestion.hpp"
#include "nldst/lm.hpp"

namespace {

using namespace nldst;

int cmd_ingest(const std::string& source, const std::string& input, const std::string& ontology_path,
               const std::string& template_path, const std::string& output,
               const std::string& skip_path) {
    Ontology ontology = Ontology::load(ontology_path);
    TemplateSet templates = TemplateSet::load(template_path);
    templates.validate_against(ontology);
    SkipReport skips;
    Corpus corpus;
    if (source == "multiwoz21") corpus = load_multiwoz(input, ontology, templates, &skips);
    else if (source == "taskmaster1") corpus = load_taskmaster(input, ontology, templates, &skips);
    else throw ConfigError("unknown source: " + source + " (expected multiwoz21 or taskmaster1)");
    write_corpus(corpus, output);
    if (!skip_path.empty()) skips.write(skip_path);
    std::cout << "ingested " << corpus.examples.size() << " annotated turns from " << input
              << " (" << skips.entries.size() << " skips)\n";
    return 0;
}

int cmd_make_synthetic(const std::string& ontology_path, const std::string& template_path, int n,
                       uint64_t seed, const std::string& output) {
    Ontology ontology = Ontology::load(ontology_path);
    TemplateSet templates = TemplateSet::load(template_path);
    Corpus corpus = generate_synthetic_corpus(ontology, templates, n, seed);
    write_corpus(corpus, output);
    std::cout << "wrote " << n << " synthetic dialogues (" << corpus.examples.size()
              << " turns) to " << output << "\n";
    return 0;
}

int cmd_train(const std::string& corpus_path, const std::string& ontology_path,
              const std::string& template_path, int order, std::vector<double> lambdas,
              bool structured, const std::string& output) {
    Ontology ontology = Ontology::load(ontology_path);
    TemplateSet templates = TemplateSet::load(template_path);
    Corpus corpus = load_canonical(corpus_path, ontology, templates, "corpus", Split::train);
    if (lambdas.empty()) {
        lambdas.assign(static_cast<size_t>(order), 1.0 / order);
        double sum = 0;
        for (size_t i = 0; i + 1 < lambdas.size(); ++i) sum += lambdas[i];
        lambdas.back() = 1.0 - sum;
    }
    if (structured)
        for (auto& ex : corpus.examples) ex.gold_nl = linearize_structured(ex.gold_structured);
    NGramModel model = fit(corpus, order, lambdas);
    model.save(output);
    std::cout << "trained order-" << order << " model on " << corpus.examples.size()
              << " examples; perplexity " << corpus_perplexity(model, corpus) << "\n";
    return 0;
}

ExperimentConfig load_config_with_overrides(const std::string& config_path,
                                            const std::string& system_override,
                                            const std::vector<double>& noise_override,
                                            const std::string& output_override) {
    ExperimentConfig cfg = ExperimentConfig::load(config_path);
    if (!system_override.empty()) cfg.system = system_override;
    if (!noise_override.empty()) cfg.noise_levels = noise_override;
    if (!output_override.empty()) cfg.output_dir = output_override;
    return cfg;
}

int cmd_run(const ExperimentConfig& cfg) {
    RunRecord record = run_experiment(cfg);
    std::cout << render_report({record}, ReportLayout::main);
    if (record.reports.size() > 1) std::cout << "\n" << render_report({record}, ReportLayout::noise);
    if (!cfg.output_dir.empty()) std::cout << "\nrun artifacts in " << cfg.output_dir << "\n";
    return 0;
}

int cmd_report(const std::string& layout_name, const std::vector<std::string>& record_paths) {
    ReportLayout layout;
    if (layout_name == "main") layout = ReportLayout::main;
    else if (layout_name == "ablation") layout = ReportLayout::ablation;
    else if (layout_name == "per_domain") layout = ReportLayout::per_domain;
    else if (layout_name == "noise") layout = ReportLayout::noise;
    else throw ConfigError("unknown layout: " + layout_name);
    std::vector<RunRecord> records;
    for (const std::string& path : record_paths) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open run record: " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        records.push_back(RunRecord::from_json_text(ss.str()));
    }
    std::cout << render_report(records, layout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"natural-language dialogue state tracking toolkit"};
    app.require_subcommand(1);

    std::string source, input, output, ontology_path, template_path, skip_path;
    std::string corpus_path, config_path, layout_name, system_override, output_override;
    std::vector<std::string> record_paths;
    std::vector<double> lambdas, noise_override;
    int order = 2, n_dialogues = 100;
    uint64_t seed = 7;
    bool structured = false;

    auto* ingest = app.add_subcommand("ingest", "convert an upstream dataset to canonical corpus format");
    ingest->add_option("--source", source, "multiwoz21 or taskmaster1")->required();
    ingest->add_option("--input", input, "upstream dataset file")->required();
    ingest->add_option("--ontology", ontology_path)->required();
    ingest->add_option("--templates", template_path)->required();
    ingest->add_option("--output", output, "canonical corpus output path")->required();
    ingest->add_option("--skip-report", skip_path, "skip report output path");

    auto* synth = app.add_subcommand("make-synthetic", "generate a synthetic corpus from the ontology");
    synth->add_option("--ontology", ontology_path)->required();
    synth->add_option("--templates", template_path)->required();
    synth->add_option("--n", n_dialogues, "number of dialogues");
    synth->add_option("--seed", seed);
    synth->add_option("--output", output)->required();

    auto* train = app.add_subcommand("train", "fit the n-gram reference model");
    train->add_option("--corpus", corpus_path)->required();
    train->add_option("--ontology", ontology_path)->required();
    train->add_option("--templates", template_path)->required();
    train->add_option("--order", order);
    train->add_option("--lambdas", lambdas, "interpolation weights (default uniform)");
    train->add_flag("--structured", structured, "train on linearized structured targets");
    train->add_option("--output", output, "model output path")->required();

    auto* run = app.add_subcommand("run", "run one experiment from a config file");
    run->add_option("--config", config_path)->required();
    run->add_option("--system", system_override, "override config system");
    run->add_option("--noise", noise_override, "override noise level list");
    run->add_option("--output-dir", output_override, "override output directory");

    auto* sweep = app.add_subcommand("sweep", "run the standard noise sweep {0, 0.1, 0.2}");
    sweep->add_option("--config", config_path)->required();
    sweep->add_option("--system", system_override, "override config system");
    sweep->add_option("--output-dir", output_override, "override output directory");

    auto* report = app.add_subcommand("report", "render tables from run records");
    report->add_option("--layout", layout_name, "main, ablation, per_domain or noise")->required();
    report->add_option("--records", record_paths, "run.record files")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(ingest))
            return cmd_ingest(source, input, ontology_path, template_path, output, skip_path);
        if (app.got_subcommand(synth))
            return cmd_make_synthetic(ontology_path, template_path, n_dialogues, seed, output);
        if (app.got_subcommand(train))
            return cmd_train(corpus_path, ontology_path, template_path, order, lambdas,
                             structured, output);
        if (app.got_subcommand(run))
            return cmd_run(load_config_with_overrides(config_path, system_override,
                                                      noise_override, output_override));
        if (app.got_subcommand(sweep))
            return cmd_run(load_config_with_overrides(config_path, system_override,
                                                      {0.0, 0.1, 0.2}, output_override));
        if (app.got_subcommand(report)) return cmd_report(layout_name, record_paths);
    } catch (const nldst::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "contract violation: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
