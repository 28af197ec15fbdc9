// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. The optional live-replication
// harness only runs when endpoint credentials are configured and never
// gates the result.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "autoform/autosef.hpp"
#include "autoform/checker.hpp"
#include "autoform/corpus.hpp"
#include "autoform/denoise.hpp"
#include "autoform/metrics.hpp"
#include "autoform/pipeline.hpp"
#include "autoform/report.hpp"
#include "autoform/retrieval.hpp"
#include "support/faults.hpp"
#include "support/oracles.hpp"
#include "support/testutil.hpp"

namespace fs = std::filesystem;
using namespace autoform;
using nlohmann::json;

namespace {

struct AcceptanceFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& message) {
    if (!condition) throw AcceptanceFailure(message);
}

void require_close(double got, double want, double tolerance, const std::string& what) {
    if (std::abs(got - want) > tolerance) {
        throw AcceptanceFailure(what + ": got " + std::to_string(got) + ", want " +
                                std::to_string(want) + " within " + std::to_string(tolerance));
    }
}

checker::CheckContext offline_context() {
    checker::CheckContext ctx;
    ctx.symbols = checker::load_symbol_whitelist(testutil::data_path("symbols.txt"));
    ctx.phrases = checker::load_phrase_whitelist(testutil::data_path("phrases.txt"));
    return ctx;
}

std::vector<corpus::CorpusItem> bundled_items() {
    std::vector<corpus::CorpusItem> items;
    for (const auto& file :
         {"Topology_ZF_1.thy", "Topology_ZF_2.thy", "Int_ZF_1.thy", "Group_ZF_1.thy"}) {
        auto text = testutil::read_file(testutil::data_path(std::string("corpus/") + file));
        auto parsed = corpus::parse_theory_file(text, file);
        items.insert(items.end(), parsed.items.begin(), parsed.items.end());
    }
    return items;
}

std::pair<std::string, std::string> random_metric_pair(SplitMix64& rng) {
    static const std::vector<std::string> vocab = {
        "lemma", "assumes", "shows",  "open",   "sets",    "\\<in>", "\\<union>", "\\<int>",
        "T",     "Pow",     "x",      "succ",   "0",       "group",  "inverse",   "topology",
        "a",     "b",       "basis",  "cover"};
    auto make = [&rng]() {
        size_t len = 1 + rng.next_below(14);
        std::string out;
        for (size_t i = 0; i < len; ++i) {
            if (i) out += ' ';
            out += vocab[rng.next_below(vocab.size())];
        }
        return out;
    };
    return {make(), make()};
}

// ---- criterion bodies -------------------------------------------------

void criterion_metric_oracles() {
    SplitMix64 rng(50505);
    for (int i = 0; i < 50; ++i) {
        auto [ref, cand] = random_metric_pair(rng);
        require_close(metrics::bleu2(ref, cand), oracles::bleu2(ref, cand), 1e-9,
                      "bleu2 vs oracle on case " + std::to_string(i));
        require_close(metrics::chrf(ref, cand), oracles::chrf(ref, cand), 1e-9,
                      "chrf vs oracle on case " + std::to_string(i));
        require_close(metrics::ruby(ref, cand), oracles::ruby(ref, cand), 1e-9,
                      "ruby vs oracle on case " + std::to_string(i));
    }
    // pearson against the textbook two-pass formula
    for (int round = 0; round < 5; ++round) {
        std::vector<std::vector<double>> columns(4, std::vector<double>(25));
        for (auto& col : columns) {
            for (auto& v : col) v = rng.next_unit() * 100.0;
        }
        auto matrix = metrics::pearson_matrix({"a", "b", "c", "d"}, columns);
        for (size_t i = 0; i < 4; ++i) {
            for (size_t j = 0; j < 4; ++j) {
                double expected = 1.0;
                if (i != j) {
                    require(oracles::pearson(columns[i], columns[j], expected),
                            "oracle pearson must be defined");
                }
                require(matrix.entries[i][j].has_value(), "pearson entry must be present");
                require_close(*matrix.entries[i][j], expected, 1e-9, "pearson vs oracle");
            }
        }
    }
    // identity inputs score exactly 100
    for (const auto& text : {"lemma a: shows \"x \\<in> X\"", "a b c d", "abcd"}) {
        require(metrics::bleu2(text, text) == 100.0, "bleu2 identity must be exactly 100");
        require(metrics::chrf(text, text) == 100.0, "chrf identity must be exactly 100");
        require(metrics::ruby(text, text) == 100.0, "ruby identity must be exactly 100");
    }
}

void criterion_corpus_extraction() {
    auto golden = json::parse(testutil::read_file(testutil::fixture_path("golden_parse.json")));
    size_t total = 0;
    std::set<corpus::ItemKind> kinds;
    bool any_locale = false;
    for (const auto& file_entry : golden["files"]) {
        const std::string file = file_entry["file"];
        auto text = testutil::read_file(testutil::data_path("corpus/" + file));
        auto parsed = corpus::parse_theory_file(text, file);
        const auto& expected = file_entry["items"];
        require(parsed.items.size() == expected.size(),
                file + ": item count differs from the golden fixture");
        for (size_t i = 0; i < parsed.items.size(); ++i) {
            const auto& got = parsed.items[i];
            const auto& want = expected[i];
            auto field_equal = [&](const char* name, const std::string& value) {
                require(value == want[name].get<std::string>(),
                        file + " item " + got.id + ": field '" + name +
                            "' differs from the golden fixture");
            };
            field_equal("id", got.id);
            field_equal("kind", std::string(corpus::kind_name(got.kind)));
            field_equal("name", got.name);
            field_equal("comment", got.comment);
            field_equal("formal_statement", got.formal_statement);
            if (want["locale"].is_null()) {
                require(!got.locale, got.id + ": unexpected locale");
            } else {
                require(got.locale && *got.locale == want["locale"].get<std::string>(),
                        got.id + ": locale differs");
                any_locale = true;
            }
            if (want["proof"].is_null()) {
                require(!got.proof, got.id + ": unexpected proof");
            } else {
                require(got.proof && *got.proof == want["proof"].get<std::string>(),
                        got.id + ": proof differs");
            }
            kinds.insert(got.kind);
            ++total;
        }
        std::vector<std::string> expected_warnings;
        for (const auto& w : file_entry["warnings"]) expected_warnings.push_back(w);
        require(parsed.warnings == expected_warnings, file + ": warnings differ");
    }
    require(total >= 25, "bundled corpus must have at least 25 items");
    require(kinds.size() == 4, "bundled corpus must cover all four item kinds");
    require(any_locale, "bundled corpus must contain locale-qualified items");

    // the published 90/10 split shape
    std::vector<corpus::CorpusItem> synthetic(2744);
    for (size_t i = 0; i < synthetic.size(); ++i) {
        synthetic[i].id = "item" + std::to_string(i);
        synthetic[i].formal_statement = "lemma x: shows \"a = a\"";
    }
    auto dataset = corpus::build_dataset(synthetic, {9, 10}, 1);
    require(dataset.train().size() == 2470, "2,744 items at 9/10 must give 2,470 train");
    require(dataset.test().size() == 274, "2,744 items at 9/10 must give 274 test");
}

void criterion_retrieval() {
    // 200-item duplicate-free fixture: every comment carries one item-unique
    // token plus rotating topic words.
    static const std::vector<std::string> topics = {
        "open",     "closed",  "compact", "dense",    "basis",   "cover",
        "finite",   "union",   "filter",  "limit",    "group",   "inverse",
        "monoid",   "order",   "integer", "addition", "interior", "closure",
        "function", "relation", "partition", "quotient", "bounded", "continuous",
        "metric",   "uniform", "complete", "directed", "net",     "neighborhood"};
    std::vector<corpus::CorpusItem> items(200);
    for (size_t i = 0; i < items.size(); ++i) {
        items[i].id = "fix" + std::to_string(i);
        items[i].formal_statement = "lemma fix" + std::to_string(i) + ": shows \"a = a\"";
        items[i].comment = "statement token" + std::to_string(i) + " relates " +
                           topics[i % topics.size()] + " and " +
                           topics[(i * 7 + 3) % topics.size()] + " with " +
                           topics[(i * 13 + 11) % topics.size()] + " structure";
        items[i].split = corpus::Split::train;
    }
    corpus::Dataset dataset;
    dataset.items = items;
    auto index = retrieval::KnowledgeBaseIndex::build(dataset, {}, {1.5, 0.75});
    for (const auto& item : items) {
        auto hits = index.retrieve(item.comment, 3);
        require(hits.size() == 3, "retrieval must return k hits");
        require(hits[0].item_id == item.id,
                "self-retrieval must rank " + item.id + " first (got " + hits[0].item_id + ")");
    }

    // hand-evaluated toy scores
    corpus::Dataset toy;
    auto toy_item = [](const std::string& id, const std::string& comment) {
        corpus::CorpusItem item;
        item.id = id;
        item.comment = comment;
        item.formal_statement = "lemma x: shows \"a = a\"";
        item.split = corpus::Split::train;
        return item;
    };
    toy.items = {toy_item("d1", "topology basis open compact"),
                 toy_item("d2", "group inverse element monoid"),
                 toy_item("d3", "ring ideal element compact compact")};
    auto toy_index = retrieval::KnowledgeBaseIndex::build(toy, {}, {1.5, 0.75});
    const double avgdl = 13.0 / 3.0;
    {
        auto hits = toy_index.retrieve("basis", 3);
        double idf = std::log((3.0 - 1.0 + 0.5) / 1.5);
        double expected = idf * 2.5 / (1.0 + 1.5 * (0.25 + 0.75 * (4.0 / avgdl)));
        require(hits[0].item_id == "d1", "toy query 'basis' must rank d1 first");
        require_close(hits[0].score, expected, 1e-9, "toy bm25 score for 'basis'");
    }
    {
        auto hits = toy_index.retrieve("ideal element", 3);
        double idf = std::log((3.0 - 1.0 + 0.5) / 1.5);
        double expected = idf * 2.5 / (1.0 + 1.5 * (0.25 + 0.75 * (5.0 / avgdl)));
        require(hits[0].item_id == "d3", "toy query 'ideal element' must rank d3 first");
        require_close(hits[0].score, expected, 1e-9, "toy bm25 score for 'ideal element'");
    }
    {
        // df = 2 of 3 floors the idf at zero
        for (const auto& hit : toy_index.retrieve("compact", 3)) {
            require(hit.score == 0.0, "common-term idf must floor to zero");
        }
    }
}

void criterion_denoising() {
    // recovery on >= 1000 seeded explanation/proof-noise cases
    std::vector<corpus::CorpusItem> items;
    for (auto& item : bundled_items()) {
        if (!item.comment.empty()) items.push_back(std::move(item));
    }
    size_t total = 0, recovered = 0;
    for (int round = 0; round < 40 && total < 1040; ++round) {
        for (const auto& item : items) {
            llm::NoiseSpec spec;
            spec.seed = 9000 + static_cast<uint64_t>(round);
            spec.append_explanation = round % 2 == 0;
            spec.append_proof = round % 3 != 0;
            if (!spec.append_explanation && !spec.append_proof) spec.append_proof = true;
            auto noisy = llm::apply_noise(item.formal_statement, spec, llm::item_salt(item.id));
            ++total;
            if (denoise::cbd(noisy.text) == item.formal_statement) ++recovered;
        }
    }
    require(total >= 1000, "noise-recovery suite must hold at least 1000 cases");
    require(static_cast<double>(recovered) >= 0.95 * static_cast<double>(total),
            "cbd must recover ground truth on at least 95% of " + std::to_string(total) +
                " cases (recovered " + std::to_string(recovered) + ")");

    // idempotence on 10,000 fuzzed inputs
    SplitMix64 rng(12121);
    static const std::vector<std::string> pieces = {
        "lemma foo: shows \"a \\<in> b\"",
        "Sure, here is the cleaned code:",
        "```isabelle",
        "```",
        "theorem bar: assumes \"x \\<subseteq> y\" shows \"x \\<in> Pow(y)\"",
        "proof -",
        "  show ?thesis by auto",
        "qed",
        "(* a stray comment *)",
        "This follows from the definition of a topology.",
        "  using assms by simp",
        "definition \"Q(x) \\<equiv> {y\\<in>x. y \\<noteq> 0}\"",
        "Note: the above lemma needs more assumptions.",
        "",
    };
    for (int i = 0; i < 10000; ++i) {
        std::string raw;
        size_t n = 1 + rng.next_below(7);
        for (size_t k = 0; k < n; ++k) {
            raw += pieces[rng.next_below(pieces.size())];
            raw += '\n';
        }
        auto once = denoise::cbd(raw);
        if (denoise::cbd(once) != once) {
            throw AcceptanceFailure("cbd must be idempotent; counterexample:\n" + raw);
        }
    }

    // case-study rows behave exactly as documented
    auto fixture = json::parse(testutil::read_file(testutil::fixture_path("case_study.json")));
    auto ctx = offline_context();
    for (const auto& row : fixture["rows"]) {
        const std::string name = row["name"];
        if (name != "3-shot" && name != "retrieval" && name != "PBD 1A") continue;
        auto cleaned = denoise::cbd(row["raw"].get<std::string>());
        require(cleaned == row["cbd"].get<std::string>(),
                name + ": cbd output differs from the documented text");
        auto diags = checker::offline_validate(cleaned, ctx);
        require(checker::passes(diags) == row["pass"].get<bool>(),
                name + ": checker outcome differs from the documented one");
        if (!row["first_error_contains"].is_null()) {
            require(!diags.empty() &&
                        diags[0].message.find(row["first_error_contains"].get<std::string>()) !=
                            std::string::npos,
                    name + ": first diagnostic differs from the documented one");
        }
    }
}

void criterion_checker() {
    auto ctx = offline_context();
    auto items = bundled_items();
    for (const auto& item : items) {
        auto diags = checker::offline_validate(item.formal_statement, ctx);
        require(diags.empty(), "ground-truth statement " + item.id + " must pass (first: " +
                                   (diags.empty() ? "" : diags[0].message) + ")");
    }

    auto catalog = faults::make_catalog(items, 30);
    require(catalog.size() == 30, "fault catalog must hold 30 cases");
    for (const auto& fault : catalog) {
        auto diags = checker::offline_validate(fault.faulty, ctx);
        require(!checker::passes(diags), fault.id + ": fault must produce an error");
        LineIndex lines(fault.faulty);
        bool in_span = false;
        for (const auto& d : diags) {
            size_t at = lines.offset_of(d.line, d.offset);
            if (at >= fault.span_begin && at < fault.span_end) in_span = true;
        }
        require(in_span, fault.id + ": no diagnostic inside the injected span");
    }

    const char* statement =
        "lemma a1: assumes \"x \\<zzz> X\" and \"y :: Y\"\n  shows \"k(h(x) \\<in> Z\"";
    auto first = checker::offline_validate(statement, ctx);
    for (int run = 0; run < 100; ++run) {
        if (checker::offline_validate(statement, ctx) != first) {
            throw AcceptanceFailure("diagnostic ordering must be deterministic across runs");
        }
    }
}

void criterion_autosef() {
    checker::OfflineChecker backend(offline_context());
    auto items = faults::make_synthetic_corpus(200, 777);
    faults::FaultRepairProvider provider(items);
    std::vector<prompts::Exemplar> exemplars = {
        {"an exemplar", "lemma ex1: shows \"a = a\"", "ex1"},
        {"another", "lemma ex2: shows \"b = b\"", "ex2"},
    };

    autosef::RunOptions options;
    options.budget = 9;
    const int max_iter = 9;
    std::vector<std::vector<bool>> pass(max_iter + 1, std::vector<bool>(items.size()));
    bool found_three_fault_trace = false;
    for (size_t i = 0; i < items.size(); ++i) {
        auto trace = autosef::run(provider, backend, exemplars, items[i].faulty, options);
        require(trace.provider_calls <= 9, "budget must cap provider calls");
        for (int k = 0; k <= max_iter; ++k) {
            size_t idx = std::min(static_cast<size_t>(k), trace.iterations.size() - 1);
            pass[static_cast<size_t>(k)][i] =
                checker::count_errors(trace.iterations[idx].diagnostics) == 0;
        }
        if (items[i].edits.size() == 3 && !found_three_fault_trace) {
            found_three_fault_trace = true;
            require(trace.stop_reason == autosef::StopReason::clean,
                    "three-fault item must reach a clean state");
            require(trace.iterations.size() == 4,
                    "three-fault item must clean in exactly three iterations");
            std::vector<int> counts;
            for (const auto& it : trace.iterations) {
                counts.push_back(checker::count_errors(it.diagnostics));
            }
            require((counts == std::vector<int>{3, 2, 1, 0}),
                    "three-fault error counts must decrease 3,2,1,0");
        }
    }
    require(found_three_fault_trace, "synthetic corpus must contain a three-fault item");

    std::vector<double> rates;
    for (const auto& flags : pass) rates.push_back(metrics::pass_rate_from_flags(flags));
    for (size_t k = 1; k < rates.size(); ++k) {
        require(rates[k] >= rates[k - 1], "per-iteration pass rate must be non-decreasing");
    }
    double first_gain = rates[1] - rates[0];
    require(first_gain > 0, "iteration 1 must improve the pass rate");
    for (size_t k = 2; k < rates.size(); ++k) {
        require(first_gain >= rates[k] - rates[k - 1],
                "iteration 1 must carry the largest single-iteration gain");
    }
}

void criterion_reproducibility() {
    std::vector<corpus::CorpusItem> items;
    for (auto& item : bundled_items()) {
        if (!item.comment.empty()) items.push_back(std::move(item));
    }
    auto dataset = corpus::build_dataset(items, {4, 5}, 11);
    auto dataset_path = (fs::temp_directory_path() / "autoform_acc_dataset.jsonl").string();
    corpus::save_dataset(dataset, dataset_path);

    pipeline::ExperimentConfig config;
    config.dataset_path = dataset_path;
    config.shots = 3;
    config.symbols_path = testutil::data_path("symbols.txt");
    config.phrases_path = testutil::data_path("phrases.txt");
    config.denoise_mode = denoise::DenoiseMode::parse("cbd");
    config.autosef_budget = 9;
    config.autoformalize_provider.noise.append_proof = true;
    config.autoformalize_provider.noise.append_explanation = true;
    config.autoformalize_provider.noise.seed = 606;

    auto path_a = (fs::temp_directory_path() / "autoform_acc_run_a.jsonl").string();
    auto path_b = (fs::temp_directory_path() / "autoform_acc_run_b.jsonl").string();
    auto path_c = (fs::temp_directory_path() / "autoform_acc_run_c.jsonl").string();
    fs::remove(path_a);
    fs::remove(path_b);
    fs::remove(path_c);

    auto run_a = pipeline::run_experiment(config, path_a);
    auto run_b = pipeline::run_experiment(config, path_b);
    require(pipeline::run_record_hash(run_a) == pipeline::run_record_hash(run_b),
            "identical configs must produce hash-identical run records");
    require(testutil::read_file(path_a) == testutil::read_file(path_b),
            "identical configs must produce byte-identical run files");

    pipeline::RunLimits limits;
    limits.max_items = run_a.items.size() / 2;
    pipeline::run_experiment(config, path_c, limits);  // killed mid-run
    auto resumed = pipeline::run_experiment(config, path_c);
    require(pipeline::run_record_hash(resumed) == pipeline::run_record_hash(run_a),
            "a resumed run must hash-match the uninterrupted run");
    require(testutil::read_file(path_c) == testutil::read_file(path_a),
            "a resumed run file must equal the uninterrupted run file");

    fs::remove(path_a);
    fs::remove(path_b);
    fs::remove(path_c);
    fs::remove(dataset_path);
}

void criterion_report_fidelity() {
    std::vector<report::AggregateRow> rows = {
        {"Zero-Shot", 0.30, 0.30, 17.14, 16.13, 51.13, 0.00, "offline"},
        {"3-Shot", 1.77, 1.77, 27.30, 24.02, 62.73, 5.47, "offline"},
        {"Query: T Index: T", 10.05, 10.05, 51.38, 44.82, 76.93, 21.53, "offline"},
    };
    require(report::render_table(rows) ==
                testutil::read_file(testutil::fixture_path("report_table.golden")),
            "report table must match the golden layout");

    struct DeltaCase {
        report::AggregateRow before;
        report::AggregateRow after;
        std::vector<std::string> expected;
    };
    std::vector<DeltaCase> cases = {
        {{"Retrieval", 6.33, 0, 48.45, 28.99, 76.40, 17.15, "x"},
         {"Retrieval+CBD", 10.05, 0, 51.38, 44.82, 76.93, 21.53, "x"},
         {"(+3.72)", "(+2.93)", "(+15.83)", "(+0.53)", "(+4.38)"}},
        {{"PBD 1A", 8.88, 0, 38.27, 38.23, 68.04, 6.57, "x"},
         {"PBD 1A+CBD", 10.49, 0, 37.92, 40.35, 68.01, 6.57, "x"},
         {"(+1.61)", "(-0.35)", "(+2.12)", "(-0.03)", "(+0.00)"}},
        {{"PBD 1D", 14.90, 0, 48.51, 46.43, 74.07, 28.10, "x"},
         {"PBD 1D+CBD", 17.32, 0, 48.62, 47.41, 74.10, 28.10, "x"},
         {"(+2.42)", "(+0.11)", "(+0.98)", "(+0.03)", "(+0.00)"}},
    };
    for (const auto& c : cases) {
        auto table = report::compare_rows({c.before, c.after}, c.before.label);
        for (const auto& needle : c.expected) {
            require(table.find(needle) != std::string::npos,
                    c.after.label + ": comparison must show the published delta " + needle);
        }
    }
}

bool criterion_live_replication() {
    const char* dataset_env = std::getenv("AUTOFORM_LIVE_DATASET");
    const char* base_url_env = std::getenv("AUTOFORM_LIVE_BASE_URL");
    if (!dataset_env || !base_url_env) return false;  // skipped

    pipeline::ExperimentConfig config;
    config.dataset_path = dataset_env;
    config.shots = 3;
    config.symbols_path = testutil::data_path("symbols.txt");
    config.phrases_path = testutil::data_path("phrases.txt");
    config.denoise_mode = denoise::DenoiseMode::parse("cbd");
    config.autosef_budget = 9;
    for (auto* provider : {&config.autoformalize_provider, &config.denoise_provider,
                           &config.repair_provider}) {
        provider->type = "http";
        provider->http.base_url = base_url_env;
        if (const char* model = std::getenv("AUTOFORM_LIVE_MODEL")) {
            provider->http.model = model;
        }
    }
    if (const char* host = std::getenv("AUTOFORM_LIVE_ISABELLE_HOST")) {
        config.checker_backend = "isabelle";
        config.isabelle.host = host;
        config.isabelle.port = std::atoi(std::getenv("AUTOFORM_LIVE_ISABELLE_PORT")
                                             ? std::getenv("AUTOFORM_LIVE_ISABELLE_PORT")
                                             : "0");
        if (const char* pw = std::getenv("AUTOFORM_LIVE_ISABELLE_PASSWORD")) {
            config.isabelle.password = pw;
        }
    }
    auto out = (fs::temp_directory_path() / "autoform_live_run.jsonl").string();
    auto run = pipeline::run_experiment(config, out);
    auto dataset = corpus::load_dataset(config.dataset_path);
    auto checker_backend = pipeline::make_checker(config);
    auto result = report::evaluate(run, dataset, *checker_backend, nullptr, "live");
    // score agreement is recorded, never asserted: hosted models drift
    std::printf("  live replication report (schema-compatible, scores recorded only):\n%s",
                report::render_table({result.aggregate}).c_str());
    return true;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* title;
        std::function<void()> body;
        double budget_s;  // 0 = no runtime bound
    };
    std::vector<Criterion> criteria = {
        {1, "metric oracles agree within 1e-9 and identities score 100", criterion_metric_oracles,
         5.0},
        {2, "corpus extraction matches the golden fixture and the 2470/274 split",
         criterion_corpus_extraction, 5.0},
        {3, "self-retrieval ranks first on 200 items and toy scores match by hand",
         criterion_retrieval, 0.0},
        {4, "cbd recovers >=95% of seeded noise, is idempotent, and matches the case study",
         criterion_denoising, 0.0},
        {5, "checker passes ground truths and flags all 30 injected faults in span",
         criterion_checker, 0.0},
        {6, "repair loop pass rate is monotone with the largest gain first",
         criterion_autosef, 30.0},
        {7, "identical configs and resumed runs reproduce identical records",
         criterion_reproducibility, 0.0},
        {8, "report tables match the golden layout and published deltas",
         criterion_report_fidelity, 0.0},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        auto start = std::chrono::steady_clock::now();
        std::string failure;
        try {
            criterion.body();
        } catch (const std::exception& e) {
            failure = e.what();
        }
        double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (failure.empty() && criterion.budget_s > 0 && seconds > criterion.budget_s) {
            failure = "runtime " + std::to_string(seconds) + "s exceeds " +
                      std::to_string(criterion.budget_s) + "s";
        }
        if (failure.empty()) {
            std::printf("PASS criterion %d: %s (%.2fs)\n", criterion.id, criterion.title,
                        seconds);
        } else {
            ++failures;
            std::printf("FAIL criterion %d: %s (%.2fs)\n  %s\n", criterion.id, criterion.title,
                        seconds, failure.c_str());
        }
    }

    try {
        if (criterion_live_replication()) {
            std::printf("PASS criterion 9: live replication harness (non-gating)\n");
        } else {
            std::printf(
                "SKIP criterion 9: live replication (set AUTOFORM_LIVE_DATASET and "
                "AUTOFORM_LIVE_BASE_URL to enable; non-gating)\n");
        }
    } catch (const std::exception& e) {
        std::printf("NOTE criterion 9: live replication attempt failed (non-gating): %s\n",
                    e.what());
    }

    return failures;
}
