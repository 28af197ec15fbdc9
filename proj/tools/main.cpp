#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "autoform/corpus.hpp"
#include "autoform/denoise.hpp"
#include "autoform/pipeline.hpp"
#include "autoform/report.hpp"
#include "autoform/retrieval.hpp"

namespace fs = std::filesystem;
using namespace autoform;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitConfig = 2;

pipeline::ProviderConfig load_provider_config(const std::string& path) {
    if (path.empty()) return {};  // oracle with clean noise
    std::ifstream in(path, std::ios::binary);
    if (!in) throw pipeline::ConfigError("cannot open provider config: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    auto config = pipeline::ExperimentConfig::from_json_text(
        "{\"schema\":\"autoform.config/1\",\"providers\":{\"autoformalize\":" + buffer.str() +
        "}}");
    return config.autoformalize_provider;
}

int cmd_corpus_extract(const std::string& src, const std::string& out,
                       const std::string& ratio, uint64_t seed) {
    std::vector<corpus::CorpusItem> items;
    std::vector<fs::path> files;
    if (fs::is_directory(src)) {
        for (const auto& entry : fs::directory_iterator(src)) {
            if (entry.path().extension() == ".thy") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(src);
    }
    if (files.empty()) throw pipeline::ConfigError("no .thy files under " + src);
    for (const auto& file : files) {
        std::ifstream in(file, std::ios::binary);
        if (!in) throw Error("cannot open " + file.string());
        std::ostringstream buffer;
        buffer << in.rdbuf();
        auto parsed = corpus::parse_theory_file(buffer.str(), file.filename().string());
        for (const auto& warning : parsed.warnings) std::cerr << "warning: " << warning << "\n";
        items.insert(items.end(), parsed.items.begin(), parsed.items.end());
    }
    auto dataset = corpus::build_dataset(std::move(items), corpus::parse_ratio(ratio), seed);
    corpus::save_dataset(dataset, out);
    std::cout << "wrote " << dataset.items.size() << " items (" << dataset.train().size()
              << " train / " << dataset.test().size() << " test) to " << out << "\n";
    return kExitOk;
}

int cmd_corpus_informalize(const std::string& dataset_path, const std::string& provider_path,
                           bool force) {
    auto dataset = corpus::load_dataset(dataset_path);
    auto shared = std::make_shared<corpus::Dataset>(dataset);
    auto provider = pipeline::make_provider(load_provider_config(provider_path), shared);
    auto report = corpus::informalize_corpus(dataset, *provider, force);
    corpus::save_dataset(dataset, dataset_path);
    std::cout << "informalized " << report.populated << " items, skipped " << report.skipped
              << ", failures " << report.failures.size() << "\n";
    for (const auto& [id, error] : report.failures) {
        std::cerr << "warning: " << id << ": " << error << "\n";
    }
    return report.failures.empty() ? kExitOk : kExitPartial;
}

int cmd_index_build(const std::string& dataset_path, const std::string& mode,
                    const std::string& out, double k1, double b) {
    auto dataset = corpus::load_dataset(dataset_path);
    auto index = retrieval::KnowledgeBaseIndex::build(
        dataset, retrieval::IndexMode::from_label(mode), {k1, b});
    index.save(out);
    std::cout << "indexed " << index.size() << " train documents (mode "
              << index.mode().label() << ") to " << out << "\n";
    return kExitOk;
}

int cmd_run(const std::string& config_path, const std::string& out) {
    auto config = pipeline::ExperimentConfig::load(config_path);
    auto run = pipeline::run_experiment(config, out);
    std::cout << "run " << run.config_hash << ": " << run.items.size() << " items, "
              << run.failed_items() << " failed, record hash "
              << pipeline::run_record_hash(run) << "\n";
    return run.failed_items() == 0 ? kExitOk : kExitPartial;
}

// Recomputes an item's stored scores after a staged rewrite of its output.
void rescore_item(pipeline::ItemRecord& item, const corpus::Dataset& dataset,
                  checker::Checker& checker_backend) {
    const auto* truth = dataset.find(item.item_id);
    if (!truth) {
        item.scores.reset();
        return;
    }
    metrics::MetricVector scores;
    scores.bleu2 = metrics::bleu2(truth->formal_statement, item.final_output);
    scores.chrf = metrics::chrf(truth->formal_statement, item.final_output);
    scores.ruby = metrics::ruby(truth->formal_statement, item.final_output);
    scores.pass = checker::passes(checker_backend.check(item.final_output));
    item.scores = scores;
}

int cmd_denoise(const std::string& in, const std::string& mode_label, const std::string& out,
                const std::string& dataset_path, const std::string& provider_path,
                const std::string& symbols, const std::string& phrases) {
    auto run = pipeline::load_run_record(in);
    auto mode = denoise::DenoiseMode::parse(mode_label);
    std::shared_ptr<corpus::Dataset> dataset;
    if (!dataset_path.empty()) {
        dataset = std::make_shared<corpus::Dataset>(corpus::load_dataset(dataset_path));
    }
    std::unique_ptr<llm::Provider> provider;
    if (mode.pbd_variant) {
        if (!dataset) {
            throw pipeline::ConfigError("prompt-based denoising needs --dataset");
        }
        provider = pipeline::make_provider(load_provider_config(provider_path), dataset);
    }
    std::unique_ptr<checker::Checker> checker_backend;
    if (dataset) {
        pipeline::ExperimentConfig checker_config;
        checker_config.symbols_path = symbols;
        checker_config.phrases_path = phrases;
        checker_backend = pipeline::make_checker(checker_config);
    }
    size_t failures = 0;
    for (auto& item : run.items) {
        std::vector<prompts::Exemplar> exemplars;
        if (dataset) {
            for (const auto& hit : item.hits) {
                if (const auto* found = dataset->find(hit.item_id)) {
                    exemplars.push_back({found->comment, found->formal_statement, found->id});
                }
            }
        }
        auto result =
            denoise::denoise(provider.get(), mode, exemplars, item.raw_output);
        item.denoised_output = result.text;
        item.pbd_failed = result.pbd_failed;
        if (result.pbd_failed) ++failures;
        item.final_output = result.text;
        item.trace.reset();
        if (checker_backend) {
            rescore_item(item, *dataset, *checker_backend);
        } else {
            item.scores.reset();
        }
    }
    pipeline::recompute_call_totals(run);
    pipeline::save_run_record(run, out);
    std::cout << "denoised " << run.items.size() << " items (mode " << mode.label() << ") to "
              << out << "\n";
    return failures == 0 ? kExitOk : kExitPartial;
}

int cmd_autosef(const std::string& in, const std::string& out, int budget,
                bool fixed_iterations, bool no_regression_guard,
                const std::string& dataset_path, const std::string& provider_path,
                const std::string& symbols, const std::string& phrases) {
    auto run = pipeline::load_run_record(in);
    auto dataset = std::make_shared<corpus::Dataset>(corpus::load_dataset(dataset_path));
    auto provider = pipeline::make_provider(load_provider_config(provider_path), dataset);

    pipeline::ExperimentConfig checker_config;
    checker_config.symbols_path = symbols;
    checker_config.phrases_path = phrases;
    auto checker_backend = pipeline::make_checker(checker_config);

    autosef::RunOptions options;
    options.budget = budget;
    options.fixed_iterations = fixed_iterations;
    options.regression_guard = !no_regression_guard;

    size_t failures = 0;
    for (auto& item : run.items) {
        std::vector<prompts::Exemplar> exemplars;
        for (const auto& hit : item.hits) {
            if (const auto* found = dataset->find(hit.item_id)) {
                exemplars.push_back({found->comment, found->formal_statement, found->id});
            }
        }
        if (exemplars.empty()) {
            std::cerr << "warning: " << item.item_id << ": no exemplars recorded, skipped\n";
            ++failures;
            continue;
        }
        std::string start = item.denoised_output.empty() ? item.raw_output
                                                         : item.denoised_output;
        auto trace = autosef::run(*provider, *checker_backend, exemplars, start, options);
        if (trace.stop_reason == autosef::StopReason::provider_error) ++failures;
        item.final_output = trace.final_code();
        item.trace = std::move(trace);
        rescore_item(item, *dataset, *checker_backend);
    }
    pipeline::recompute_call_totals(run);
    pipeline::save_run_record(run, out);
    std::cout << "refined " << run.items.size() << " items (budget " << budget << ") to "
              << out << "\n";
    return failures == 0 ? kExitOk : kExitPartial;
}

int cmd_evaluate(const std::string& run_path, const std::string& dataset_path,
                 const std::string& out_dir, bool with_cbs, const std::string& symbols,
                 const std::string& phrases) {
    std::vector<std::string> warnings;
    auto run = pipeline::load_run_record(run_path, &warnings);
    auto dataset = corpus::load_dataset(dataset_path);

    pipeline::ExperimentConfig checker_config;
    checker_config.symbols_path = symbols;
    checker_config.phrases_path = phrases;
    auto checker_backend = pipeline::make_checker(checker_config);

    metrics::HashEmbedder embedder;
    auto result = report::evaluate(run, dataset, *checker_backend,
                                   with_cbs ? &embedder : nullptr,
                                   fs::path(run_path).stem().string());
    for (const auto& w : warnings) result.warnings.push_back(w);
    report::write_report_files(result, out_dir);
    std::cout << report::render_table({result.aggregate});
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "report files written to " << out_dir << "\n";
    return result.warnings.empty() ? kExitOk : kExitPartial;
}

int cmd_compare(const std::vector<std::string>& labeled_runs, const std::string& baseline) {
    std::vector<pipeline::RunRecord> runs;
    std::vector<std::string> labels;
    for (const auto& spec : labeled_runs) {
        auto eq = spec.find('=');
        if (eq == std::string::npos) {
            throw pipeline::ConfigError("expected label=runfile, got " + spec);
        }
        labels.push_back(spec.substr(0, eq));
        runs.push_back(pipeline::load_run_record(spec.substr(eq + 1)));
    }
    std::string baseline_label = baseline.empty() ? labels.front() : baseline;
    std::cout << report::compare_runs(runs, labels, baseline_label);
    return kExitOk;
}

int cmd_check(const std::string& statement_path, const std::string& symbols,
              const std::string& phrases) {
    std::ifstream in(statement_path, std::ios::binary);
    if (!in) throw Error("cannot open " + statement_path);
    std::ostringstream buffer;
    buffer << in.rdbuf();

    pipeline::ExperimentConfig checker_config;
    checker_config.symbols_path = symbols;
    checker_config.phrases_path = phrases;
    auto checker_backend = pipeline::make_checker(checker_config);
    auto diagnostics = checker_backend->check(trim(buffer.str()));
    for (const auto& d : diagnostics) {
        std::cout << (d.severity == checker::Severity::error ? "error" : "warning") << " at "
                  << d.line << ":" << d.offset << ": " << d.message << "\n";
    }
    std::cout << (checker::passes(diagnostics) ? "pass" : "fail") << "\n";
    return checker::passes(diagnostics) ? kExitOk : kExitPartial;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Retrieval-augmented autoformalization pipeline for Isabelle/ZF"};
    app.require_subcommand(1);

    std::string default_symbols = "data/symbols.txt";
    std::string default_phrases = "data/phrases.txt";

    // corpus extract | informalize
    auto* corpus_cmd = app.add_subcommand("corpus", "Dataset construction");
    corpus_cmd->require_subcommand(1);
    auto* extract = corpus_cmd->add_subcommand("extract", "Parse theory files into a dataset");
    std::string src, out_file, ratio = "0.9";
    uint64_t seed = 0;
    extract->add_option("--src", src, "Theory file or directory")->required();
    extract->add_option("--out", out_file, "Output dataset (JSONL)")->required();
    extract->add_option("--ratio", ratio, "Train fraction, e.g. 0.9 or 9/10");
    extract->add_option("--seed", seed, "Split shuffle seed");

    auto* informalize = corpus_cmd->add_subcommand("informalize",
                                                   "Fill machine informalizations in place");
    std::string inf_dataset, inf_provider;
    bool inf_force = false;
    informalize->add_option("--dataset", inf_dataset, "Dataset to update")->required();
    informalize->add_option("--provider", inf_provider, "Provider config JSON file");
    informalize->add_flag("--force", inf_force, "Overwrite existing informalizations");

    // index build
    auto* index_cmd = app.add_subcommand("index", "Knowledge-base index");
    index_cmd->require_subcommand(1);
    auto* build = index_cmd->add_subcommand("build", "Build a BM25 index over the train split");
    std::string idx_dataset, idx_mode = "T", idx_out;
    double k1 = 1.5, b = 0.75;
    build->add_option("--dataset", idx_dataset, "Dataset (JSONL)")->required();
    build->add_option("--mode", idx_mode, "Index fields: T, TS, IS or TIS");
    build->add_option("--out", idx_out, "Output index file")->required();
    build->add_option("--k1", k1, "BM25 k1");
    build->add_option("--b", b, "BM25 b");

    // run
    auto* run_cmd = app.add_subcommand("run", "Execute the three-stage pipeline");
    std::string run_config, run_out;
    run_cmd->add_option("--config", run_config, "Experiment config JSON")->required();
    run_cmd->add_option("--out", run_out, "Run record output (JSONL)")->required();

    // denoise
    auto* denoise_cmd = app.add_subcommand("denoise", "Re-run stage 2 over a run record");
    std::string dn_in, dn_mode = "cbd", dn_out, dn_dataset, dn_provider;
    std::string dn_symbols = default_symbols, dn_phrases = default_phrases;
    denoise_cmd->add_option("--in", dn_in, "Input run record")->required();
    denoise_cmd->add_option("--mode", dn_mode, "cbd, 1A..1D or 1A+cbd..1D+cbd");
    denoise_cmd->add_option("--out", dn_out, "Output run record")->required();
    denoise_cmd->add_option("--dataset", dn_dataset, "Dataset (needed for PBD exemplars)");
    denoise_cmd->add_option("--provider", dn_provider, "Provider config JSON file");
    denoise_cmd->add_option("--symbols", dn_symbols, "Symbol whitelist");
    denoise_cmd->add_option("--phrases", dn_phrases, "Phrase whitelist");

    // autosef
    auto* sef_cmd = app.add_subcommand("autosef", "Re-run stage 3 over a run record");
    std::string sef_in, sef_out, sef_dataset, sef_provider;
    std::string sef_symbols = default_symbols, sef_phrases = default_phrases;
    int budget = 9;
    bool fixed_iterations = false, no_guard = false;
    sef_cmd->add_option("--in", sef_in, "Input run record")->required();
    sef_cmd->add_option("--out", sef_out, "Output run record")->required();
    sef_cmd->add_option("--budget", budget, "Maximum repair calls per item");
    sef_cmd->add_flag("--fixed-iterations", fixed_iterations,
                      "Disable the two-unchanged-iterations early stop");
    sef_cmd->add_flag("--no-regression-guard", no_guard,
                      "Accept refinements even when they add errors");
    sef_cmd->add_option("--dataset", sef_dataset, "Dataset (for exemplars)")->required();
    sef_cmd->add_option("--provider", sef_provider, "Provider config JSON file");
    sef_cmd->add_option("--symbols", sef_symbols, "Symbol whitelist");
    sef_cmd->add_option("--phrases", sef_phrases, "Phrase whitelist");

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "Score a run record");
    std::string ev_run, ev_dataset, ev_out = "reports";
    std::string ev_symbols = default_symbols, ev_phrases = default_phrases;
    bool with_cbs = false;
    eval_cmd->add_option("--run", ev_run, "Run record")->required();
    eval_cmd->add_option("--dataset", ev_dataset, "Dataset with ground truths")->required();
    eval_cmd->add_option("--out", ev_out, "Report directory");
    eval_cmd->add_flag("--with-cbs", with_cbs, "Include the hash-embedding score");
    eval_cmd->add_option("--symbols", ev_symbols, "Symbol whitelist");
    eval_cmd->add_option("--phrases", ev_phrases, "Phrase whitelist");

    // compare
    auto* cmp_cmd = app.add_subcommand("compare", "Compare runs with deltas");
    std::vector<std::string> cmp_runs;
    std::string cmp_baseline;
    cmp_cmd->add_option("runs", cmp_runs, "label=runfile entries")->required();
    cmp_cmd->add_option("--baseline", cmp_baseline, "Baseline label (default: first)");

    // check
    auto* check_cmd = app.add_subcommand("check", "Validate one statement offline");
    std::string chk_file;
    std::string chk_symbols = default_symbols, chk_phrases = default_phrases;
    check_cmd->add_option("--statement", chk_file, "File holding one statement")->required();
    check_cmd->add_option("--symbols", chk_symbols, "Symbol whitelist");
    check_cmd->add_option("--phrases", chk_phrases, "Phrase whitelist");

    CLI11_PARSE(app, argc, argv);

    try {
        if (extract->parsed()) return cmd_corpus_extract(src, out_file, ratio, seed);
        if (informalize->parsed()) {
            return cmd_corpus_informalize(inf_dataset, inf_provider, inf_force);
        }
        if (build->parsed()) return cmd_index_build(idx_dataset, idx_mode, idx_out, k1, b);
        if (run_cmd->parsed()) return cmd_run(run_config, run_out);
        if (denoise_cmd->parsed()) {
            return cmd_denoise(dn_in, dn_mode, dn_out, dn_dataset, dn_provider, dn_symbols, dn_phrases);
        }
        if (sef_cmd->parsed()) {
            return cmd_autosef(sef_in, sef_out, budget, fixed_iterations, no_guard, sef_dataset,
                               sef_provider, sef_symbols, sef_phrases);
        }
        if (eval_cmd->parsed()) {
            return cmd_evaluate(ev_run, ev_dataset, ev_out, with_cbs, ev_symbols, ev_phrases);
        }
        if (cmp_cmd->parsed()) return cmd_compare(cmp_runs, cmp_baseline);
        if (check_cmd->parsed()) return cmd_check(chk_file, chk_symbols, chk_phrases);
    } catch (const pipeline::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
