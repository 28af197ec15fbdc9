#include "autoform/pipeline.hpp"

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "autoform/prompts.hpp"
#include "autoform/tokenize.hpp"

namespace autoform::pipeline {

using nlohmann::json;

namespace {

json noise_to_json(const llm::NoiseSpec& noise) {
    return {{"append_explanation", noise.append_explanation},
            {"append_proof", noise.append_proof},
            {"corrupt_symbol_rate", noise.corrupt_symbol_rate},
            {"drop_bracket_rate", noise.drop_bracket_rate},
            {"seed", noise.seed}};
}

llm::NoiseSpec noise_from_json(const json& j) {
    llm::NoiseSpec noise;
    noise.append_explanation = j.value("append_explanation", false);
    noise.append_proof = j.value("append_proof", false);
    noise.corrupt_symbol_rate = j.value("corrupt_symbol_rate", 0.0);
    noise.drop_bracket_rate = j.value("drop_bracket_rate", 0.0);
    noise.seed = j.value("seed", uint64_t{0});
    return noise;
}

json provider_to_json(const ProviderConfig& p) {
    json j;
    j["type"] = p.type;
    if (p.type == "oracle") {
        j["noise"] = noise_to_json(p.noise);
        j["pbd_1a_bias"] = p.pbd_1a_bias;
    } else if (p.type == "scripted") {
        j["script"] = p.script_path;
    } else if (p.type == "http") {
        j["base_url"] = p.http.base_url;
        j["path"] = p.http.path;
        j["model"] = p.http.model;
        j["api_key_env"] = p.http.api_key_env;
        j["timeout_s"] = p.http.timeout_s;
        j["max_retries"] = p.http.max_retries;
    }
    return j;
}

ProviderConfig provider_from_json(const json& j) {
    ProviderConfig p;
    p.type = j.value("type", "oracle");
    if (p.type == "oracle") {
        if (j.contains("noise")) p.noise = noise_from_json(j["noise"]);
        p.pbd_1a_bias = j.value("pbd_1a_bias", true);
    } else if (p.type == "scripted") {
        p.script_path = j.value("script", "");
    } else if (p.type == "http") {
        p.http.base_url = j.value("base_url", p.http.base_url);
        p.http.path = j.value("path", p.http.path);
        p.http.model = j.value("model", p.http.model);
        p.http.api_key_env = j.value("api_key_env", p.http.api_key_env);
        p.http.timeout_s = j.value("timeout_s", p.http.timeout_s);
        p.http.max_retries = j.value("max_retries", p.http.max_retries);
    } else {
        throw ConfigError("unknown provider type: " + p.type);
    }
    return p;
}

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["schema"] = "autoform.config/1";
    j["dataset"] = c.dataset_path;
    j["retrieval"] = {{"query_zero_shot", c.query_mode.augment_with_zero_shot},
                      {"index", c.index_mode.label()},
                      {"shots", c.shots},
                      {"k1", c.bm25.k1},
                      {"b", c.bm25.b}};
    j["providers"] = {{"autoformalize", provider_to_json(c.autoformalize_provider)},
                      {"informalize", provider_to_json(c.informalize_provider)},
                      {"denoise", provider_to_json(c.denoise_provider)},
                      {"repair", provider_to_json(c.repair_provider)}};
    j["denoise_mode"] = c.denoise_mode ? json(c.denoise_mode->label()) : json(nullptr);
    j["fixed_exemplars"] = c.fixed_exemplars_path;
    j["autosef"] = {{"budget", c.autosef_budget},
                    {"fixed_iterations", c.fixed_iterations},
                    {"regression_guard", c.regression_guard}};
    j["checker"] = {{"backend", c.checker_backend},
                    {"symbols", c.symbols_path},
                    {"phrases", c.phrases_path},
                    {"session", c.isabelle.session},
                    {"host", c.isabelle.host},
                    {"port", c.isabelle.port}};
    j["metrics"] = {{"cbs", c.with_cbs}};
    j["seed"] = c.seed;
    j["workers"] = c.workers;
    j["templates_dir"] = c.templates_dir;
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    if (j.value("schema", "") != "autoform.config/1") {
        throw ConfigError("unsupported config schema; expected autoform.config/1");
    }
    ExperimentConfig c;
    c.dataset_path = j.value("dataset", "");
    if (j.contains("retrieval")) {
        const auto& r = j["retrieval"];
        c.query_mode.augment_with_zero_shot = r.value("query_zero_shot", false);
        if (r.contains("index")) {
            c.index_mode = retrieval::IndexMode::from_label(r["index"].get<std::string>());
        }
        c.shots = r.value("shots", 3);
        c.bm25.k1 = r.value("k1", 1.5);
        c.bm25.b = r.value("b", 0.75);
    }
    if (j.contains("providers")) {
        const auto& p = j["providers"];
        if (p.contains("autoformalize"))
            c.autoformalize_provider = provider_from_json(p["autoformalize"]);
        if (p.contains("informalize"))
            c.informalize_provider = provider_from_json(p["informalize"]);
        if (p.contains("denoise")) c.denoise_provider = provider_from_json(p["denoise"]);
        if (p.contains("repair")) c.repair_provider = provider_from_json(p["repair"]);
    }
    if (j.contains("denoise_mode") && !j["denoise_mode"].is_null()) {
        c.denoise_mode = denoise::DenoiseMode::parse(j["denoise_mode"].get<std::string>());
    }
    c.fixed_exemplars_path = j.value("fixed_exemplars", "");
    if (j.contains("autosef")) {
        const auto& a = j["autosef"];
        c.autosef_budget = a.value("budget", 9);
        c.fixed_iterations = a.value("fixed_iterations", false);
        c.regression_guard = a.value("regression_guard", true);
    }
    if (j.contains("checker")) {
        const auto& ch = j["checker"];
        c.checker_backend = ch.value("backend", "offline");
        c.symbols_path = ch.value("symbols", "");
        c.phrases_path = ch.value("phrases", "");
        c.isabelle.session = ch.value("session", "ZF");
        c.isabelle.host = ch.value("host", "127.0.0.1");
        c.isabelle.port = ch.value("port", 0);
    }
    if (j.contains("metrics")) c.with_cbs = j["metrics"].value("cbs", false);
    c.seed = j.value("seed", uint64_t{0});
    c.workers = j.value("workers", 1);
    c.templates_dir = j.value("templates_dir", "");
    return c;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (dataset_path.empty()) throw ConfigError("config: dataset path required");
    if (shots < 0) throw ConfigError("config: shots must be >= 0");
    if (autosef_budget < 0) throw ConfigError("config: autosef budget must be >= 0");
    if (autosef_budget > 0 && shots == 0) {
        throw ConfigError(
            "config: the repair stage renders exemplars into its prompts; set shots > 0 or "
            "budget 0");
    }
    if (denoise_mode && denoise_mode->pbd_variant == prompts::PbdVariant::v1c &&
        fixed_exemplars_path.empty()) {
        throw ConfigError("config: PBD variant 1C needs fixed_exemplars");
    }
    if (denoise_mode && denoise_mode->pbd_variant == prompts::PbdVariant::v1d && shots == 0) {
        throw ConfigError("config: PBD variant 1D needs retrieved exemplars; set shots > 0");
    }
    if (checker_backend != "offline" && checker_backend != "isabelle") {
        throw ConfigError("config: unknown checker backend " + checker_backend);
    }
    if (checker_backend == "offline" && symbols_path.empty()) {
        throw ConfigError("config: offline checker needs a symbol whitelist path");
    }
    if (workers < 1) throw ConfigError("config: workers must be >= 1");
}

std::string ExperimentConfig::canonical_json() const { return config_to_json(*this).dump(); }

std::string ExperimentConfig::hash() const { return hex64(fnv1a64(canonical_json())); }

std::string ExperimentConfig::to_json_text() const { return config_to_json(*this).dump(2) + "\n"; }

ExperimentConfig ExperimentConfig::from_json_text(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_json(j);
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_json_text(buffer.str());
}

std::unique_ptr<llm::Provider> make_provider(const ProviderConfig& config,
                                             std::shared_ptr<const corpus::Dataset> dataset) {
    if (config.type == "oracle") {
        if (!dataset) throw ConfigError("oracle provider needs a dataset");
        return std::make_unique<llm::OracleProvider>(dataset, config.noise, config.pbd_1a_bias);
    }
    if (config.type == "scripted") {
        std::ifstream in(config.script_path, std::ios::binary);
        if (!in) throw ConfigError("cannot open script file: " + config.script_path);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw ConfigError("script file is not valid JSON: " + std::string(e.what()));
        }
        std::map<std::string, std::string> table;
        for (const auto& [prompt, response] : j.items()) {
            table[prompt] = response.get<std::string>();
        }
        return std::make_unique<llm::ScriptedProvider>(std::move(table));
    }
    if (config.type == "http") {
        return std::make_unique<llm::HttpChatProvider>(config.http);
    }
    throw ConfigError("unknown provider type: " + config.type);
}

std::unique_ptr<checker::Checker> make_checker(const ExperimentConfig& config) {
    if (config.checker_backend == "isabelle") {
        return std::make_unique<checker::IsabelleClient>(config.isabelle);
    }
    checker::CheckContext ctx;
    ctx.symbols = checker::load_symbol_whitelist(config.symbols_path);
    if (!config.phrases_path.empty()) {
        ctx.phrases = checker::load_phrase_whitelist(config.phrases_path);
    }
    return std::make_unique<checker::OfflineChecker>(std::move(ctx));
}

namespace {

json diagnostic_to_json(const checker::SyntaxDiagnostic& d) {
    return {{"line", d.line},
            {"offset", d.offset},
            {"end_offset", d.end_offset},
            {"message", d.message},
            {"severity", d.severity == checker::Severity::error ? "error" : "warning"}};
}

checker::SyntaxDiagnostic diagnostic_from_json(const json& j) {
    checker::SyntaxDiagnostic d;
    d.line = j.value("line", 1);
    d.offset = j.value("offset", 0);
    d.end_offset = j.value("end_offset", -1);
    d.message = j.value("message", "");
    d.severity = j.value("severity", "error") == "error" ? checker::Severity::error
                                                         : checker::Severity::warning;
    return d;
}

json item_to_json(const ItemRecord& item) {
    json j;
    j["type"] = "item";
    j["id"] = item.item_id;
    j["status"] = item.status;
    j["error"] = item.error;
    j["query"] = item.query;
    j["zero_shot"] = item.zero_shot;
    json hits = json::array();
    for (const auto& hit : item.hits) {
        hits.push_back({{"id", hit.item_id}, {"score", hit.score}, {"rank", hit.rank}});
    }
    j["hits"] = std::move(hits);
    json prompts_json = json::array();
    for (const auto& p : item.prompts) {
        prompts_json.push_back({{"family", p.family}, {"id", p.id}, {"text", p.text}});
    }
    j["prompts"] = std::move(prompts_json);
    j["raw_output"] = item.raw_output;
    j["denoised_output"] = item.denoised_output;
    j["pbd_failed"] = item.pbd_failed;
    if (item.trace) {
        json iterations = json::array();
        for (const auto& it : item.trace->iterations) {
            json diagnostics = json::array();
            for (const auto& d : it.diagnostics) diagnostics.push_back(diagnostic_to_json(d));
            iterations.push_back({{"code", it.code},
                                  {"attempted", it.attempted},
                                  {"diagnostics", std::move(diagnostics)},
                                  {"prompt_id", it.prompt_id},
                                  {"changed", it.changed}});
        }
        j["trace"] = {{"iterations", std::move(iterations)},
                      {"stop_reason", std::string(autosef::stop_reason_name(
                                          item.trace->stop_reason))},
                      {"provider_calls", item.trace->provider_calls}};
    } else {
        j["trace"] = nullptr;
    }
    j["final_output"] = item.final_output;
    if (item.scores) {
        json m;
        m["bleu2"] = item.scores->bleu2;
        m["chrf"] = item.scores->chrf;
        m["ruby"] = item.scores->ruby;
        m["cbs"] = item.scores->cbs ? json(*item.scores->cbs) : json(nullptr);
        m["pass"] = item.scores->pass;
        j["metrics"] = std::move(m);
    } else {
        j["metrics"] = nullptr;
    }
    j["provider_calls"] = item.provider_calls;
    j["latency_ms"] = item.latency_ms;
    return j;
}

ItemRecord item_from_json(const json& j) {
    ItemRecord item;
    item.item_id = j.value("id", "");
    item.status = j.value("status", "ok");
    item.error = j.value("error", "");
    item.query = j.value("query", "");
    item.zero_shot = j.value("zero_shot", "");
    for (const auto& h : j.value("hits", json::array())) {
        item.hits.push_back({h.value("id", ""), h.value("score", 0.0), h.value("rank", 0)});
    }
    for (const auto& p : j.value("prompts", json::array())) {
        item.prompts.push_back({p.value("family", ""), p.value("id", ""), p.value("text", "")});
    }
    item.raw_output = j.value("raw_output", "");
    item.denoised_output = j.value("denoised_output", "");
    item.pbd_failed = j.value("pbd_failed", false);
    if (j.contains("trace") && !j["trace"].is_null()) {
        autosef::RefinementTrace trace;
        for (const auto& it : j["trace"].value("iterations", json::array())) {
            autosef::Iteration iteration;
            iteration.code = it.value("code", "");
            iteration.attempted = it.value("attempted", "");
            for (const auto& d : it.value("diagnostics", json::array())) {
                iteration.diagnostics.push_back(diagnostic_from_json(d));
            }
            iteration.prompt_id = it.value("prompt_id", "");
            iteration.changed = it.value("changed", false);
            trace.iterations.push_back(std::move(iteration));
        }
        std::string reason = j["trace"].value("stop_reason", "clean");
        if (reason == "clean") trace.stop_reason = autosef::StopReason::clean;
        else if (reason == "budget_exhausted") trace.stop_reason = autosef::StopReason::budget_exhausted;
        else if (reason == "provider_error") trace.stop_reason = autosef::StopReason::provider_error;
        else trace.stop_reason = autosef::StopReason::no_change_twice;
        trace.provider_calls = j["trace"].value("provider_calls", size_t{0});
        item.trace = std::move(trace);
    }
    item.final_output = j.value("final_output", "");
    if (j.contains("metrics") && !j["metrics"].is_null()) {
        metrics::MetricVector m;
        const auto& mj = j["metrics"];
        m.bleu2 = mj.value("bleu2", 0.0);
        m.chrf = mj.value("chrf", 0.0);
        m.ruby = mj.value("ruby", 0.0);
        if (mj.contains("cbs") && !mj["cbs"].is_null()) m.cbs = mj["cbs"].get<double>();
        m.pass = mj.value("pass", false);
        item.scores = m;
    }
    item.provider_calls = j.value("provider_calls", size_t{0});
    item.latency_ms = j.value("latency_ms", 0.0);
    return item;
}

json header_json(const RunRecord& run) {
    json j;
    j["type"] = "header";
    j["schema"] = "autoform.run/1";
    j["config"] = json::parse(run.config_json);
    j["config_hash"] = run.config_hash;
    return j;
}

json footer_json(const RunRecord& run) {
    json j;
    j["type"] = "footer";
    j["items"] = run.items.size();
    j["provider_calls"] = {{"zero_shot", run.zero_shot_calls},
                           {"autoformalize", run.autoformalize_calls},
                           {"denoise", run.denoise_calls},
                           {"repair", run.repair_calls}};
    j["checker_backend"] = run.checker_backend;
    return j;
}

}  // namespace

size_t RunRecord::failed_items() const {
    size_t n = 0;
    for (const auto& item : items) {
        if (item.status != "ok") ++n;
    }
    return n;
}

// Footer totals derive from the item records so a resumed run reports the
// same numbers as an uninterrupted one.
void recompute_call_totals(RunRecord& run) {
    run.zero_shot_calls = 0;
    run.autoformalize_calls = 0;
    run.denoise_calls = 0;
    run.repair_calls = 0;
    for (const auto& item : run.items) {
        if (!item.zero_shot.empty()) ++run.zero_shot_calls;
        if (!item.raw_output.empty()) ++run.autoformalize_calls;
        for (const auto& prompt : item.prompts) {
            if (prompt.family.rfind("pbd_", 0) == 0) ++run.denoise_calls;
        }
        if (item.trace) run.repair_calls += item.trace->provider_calls;
    }
    run.autoformalize_calls += run.zero_shot_calls;
}

std::string run_record_to_jsonl(const RunRecord& run) {
    std::string out = header_json(run).dump() + "\n";
    for (const auto& item : run.items) out += item_to_json(item).dump() + "\n";
    out += footer_json(run).dump() + "\n";
    return out;
}

RunRecord run_record_from_jsonl(std::string_view text, std::vector<std::string>* warnings) {
    RunRecord run;
    auto lines = split_lines(text);
    if (lines.empty()) throw Error("run file is empty");
    bool have_header = false;
    for (size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        json j;
        try {
            j = json::parse(lines[i]);
        } catch (const json::exception& e) {
            if (warnings) {
                warnings->push_back("line " + std::to_string(i + 1) +
                                    " is not parseable and was skipped: " + e.what());
                continue;
            }
            throw Error("run file line " + std::to_string(i + 1) + ": " + e.what());
        }
        std::string type = j.value("type", "");
        if (type == "header") {
            run.config_hash = j.value("config_hash", "");
            run.config_json = j.value("config", json::object()).dump();
            have_header = true;
        } else if (type == "item") {
            run.items.push_back(item_from_json(j));
        } else if (type == "footer") {
            const auto& calls = j.value("provider_calls", json::object());
            run.zero_shot_calls = calls.value("zero_shot", size_t{0});
            run.autoformalize_calls = calls.value("autoformalize", size_t{0});
            run.denoise_calls = calls.value("denoise", size_t{0});
            run.repair_calls = calls.value("repair", size_t{0});
            run.checker_backend = j.value("checker_backend", "offline");
        }
    }
    if (!have_header) throw Error("run file has no header record");
    return run;
}

void save_run_record(const RunRecord& run, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path);
    out << run_record_to_jsonl(run);
}

RunRecord load_run_record(const std::string& path, std::vector<std::string>* warnings) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open run file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return run_record_from_jsonl(buffer.str(), warnings);
}

std::string run_record_hash(const RunRecord& run) {
    // Strip wall-clock fields so reruns hash identically.
    json lines = json::array();
    lines.push_back(header_json(run));
    for (const auto& item : run.items) {
        auto j = item_to_json(item);
        j.erase("latency_ms");
        lines.push_back(std::move(j));
    }
    lines.push_back(footer_json(run));
    return hex64(fnv1a64(lines.dump()));
}

namespace {

struct Stage {
    const ExperimentConfig& config;
    std::shared_ptr<const corpus::Dataset> dataset;
    std::optional<retrieval::KnowledgeBaseIndex> index;
    std::unique_ptr<llm::Provider> autoformalize;
    std::unique_ptr<llm::Provider> denoiser;
    std::unique_ptr<llm::Provider> repairer;
    std::unique_ptr<checker::Checker> check;
    std::vector<prompts::Exemplar> fixed_exemplars;
    prompts::TemplateSet templates;
    std::unique_ptr<metrics::HashEmbedder> embedder;
    std::mutex checker_mutex;  // remote backends serialize per connection
};

prompts::Exemplar exemplar_from_hit(const corpus::Dataset& dataset,
                                    const retrieval::RetrievalHit& hit) {
    const auto* item = dataset.find(hit.item_id);
    if (!item) throw Error("retrieval hit names a missing item: " + hit.item_id);
    return {item->comment, item->formal_statement, item->id};
}

ItemRecord process_item(Stage& stage, const corpus::CorpusItem& item) {
    const auto& config = stage.config;
    ItemRecord record;
    record.item_id = item.id;
    try {
        // Stage 1: query, retrieve, autoformalize.
        std::optional<std::string> zero_shot;
        if (config.query_mode.augment_with_zero_shot) {
            auto prompt = stage.templates.render_autoformalization({}, item.comment);
            record.prompts.push_back({"autoformalize_zero_shot",
                                      hex64(fnv1a64(prompt.text)), prompt.text});
            zero_shot = stage.autoformalize->complete({prompt.text, {}, "zero_shot"}).text;
            record.zero_shot = *zero_shot;
            ++record.provider_calls;
        }
        record.query = retrieval::make_query(item, config.query_mode, zero_shot);

        std::vector<prompts::Exemplar> exemplars;
        if (config.shots > 0) {
            record.hits =
                stage.index->retrieve(record.query, static_cast<size_t>(config.shots));
            for (const auto& hit : record.hits) {
                exemplars.push_back(exemplar_from_hit(*stage.dataset, hit));
            }
        }

        auto prompt = stage.templates.render_autoformalization(exemplars, item.comment);
        record.prompts.push_back(
            {"autoformalize", hex64(fnv1a64(prompt.text)), prompt.text});
        record.raw_output = stage.autoformalize->complete({prompt.text, {}, "stage1"}).text;
        ++record.provider_calls;

        // Stage 2: denoise.
        record.denoised_output = record.raw_output;
        if (config.denoise_mode) {
            std::vector<prompts::Exemplar> pbd_exemplars;
            if (config.denoise_mode->pbd_variant == prompts::PbdVariant::v1d) {
                pbd_exemplars = exemplars;
            } else if (config.denoise_mode->pbd_variant == prompts::PbdVariant::v1c) {
                pbd_exemplars = stage.fixed_exemplars;
            }
            if (config.denoise_mode->pbd_variant) {
                auto pbd_prompt = stage.templates.render_pbd(
                    *config.denoise_mode->pbd_variant, pbd_exemplars, record.raw_output);
                record.prompts.push_back({std::string(prompts::family_name(pbd_prompt.family)),
                                          hex64(fnv1a64(pbd_prompt.text)), pbd_prompt.text});
            }
            auto result = denoise::denoise(stage.denoiser.get(), *config.denoise_mode,
                                           pbd_exemplars, record.raw_output, stage.templates);
            record.denoised_output = result.text;
            record.pbd_failed = result.pbd_failed;
            if (config.denoise_mode->pbd_variant) ++record.provider_calls;  // attempt counts
        }

        // Stage 3: iterative repair.
        record.final_output = record.denoised_output;
        if (config.autosef_budget > 0) {
            autosef::RunOptions options;
            options.budget = config.autosef_budget;
            options.fixed_iterations = config.fixed_iterations;
            options.regression_guard = config.regression_guard;
            std::lock_guard<std::mutex> lock(stage.checker_mutex);
            auto trace = autosef::run(*stage.repairer, *stage.check, exemplars,
                                      record.denoised_output, options, stage.templates);
            record.provider_calls += trace.provider_calls;
            for (const auto& iteration : trace.iterations) {
                if (!iteration.prompt_id.empty()) {
                    record.prompts.push_back({"autosef", iteration.prompt_id, ""});
                }
            }
            record.final_output = trace.final_code();
            record.trace = std::move(trace);
        }

        // Per-item scores against the ground truth.
        metrics::MetricVector scores;
        scores.bleu2 = metrics::bleu2(item.formal_statement, record.final_output);
        scores.chrf = metrics::chrf(item.formal_statement, record.final_output);
        scores.ruby = metrics::ruby(item.formal_statement, record.final_output);
        if (stage.embedder) {
            scores.cbs = metrics::cbs(*stage.embedder, item.formal_statement,
                                      record.final_output);
        }
        {
            std::lock_guard<std::mutex> lock(stage.checker_mutex);
            scores.pass = checker::passes(stage.check->check(record.final_output));
        }
        record.scores = scores;
    } catch (const Error& e) {
        record.status = "failed";
        record.error = e.what();
    }
    return record;
}

}  // namespace

RunRecord run_experiment(const ExperimentConfig& config, const std::string& out_path,
                         const RunLimits& limits) {
    config.validate();

    auto dataset = std::make_shared<corpus::Dataset>(corpus::load_dataset(config.dataset_path));
    if (dataset->test().empty()) throw ConfigError("dataset has no test split");

    Stage stage{config,
                dataset,
                std::nullopt,
                make_provider(config.autoformalize_provider, dataset),
                make_provider(config.denoise_provider, dataset),
                make_provider(config.repair_provider, dataset),
                make_checker(config),
                {},
                config.templates_dir.empty() ? prompts::TemplateSet::builtin()
                                             : prompts::TemplateSet::load_dir(config.templates_dir),
                nullptr,
                {}};
    if (config.shots > 0) {
        stage.index = retrieval::KnowledgeBaseIndex::build(*dataset, config.index_mode,
                                                           config.bm25);
    }
    if (config.denoise_mode && config.denoise_mode->pbd_variant == prompts::PbdVariant::v1c) {
        stage.fixed_exemplars = prompts::load_fixed_exemplars(config.fixed_exemplars_path);
    }
    if (config.with_cbs) stage.embedder = std::make_unique<metrics::HashEmbedder>();

    RunRecord run;
    run.config_json = config.canonical_json();
    run.config_hash = config.hash();
    run.checker_backend = stage.check->backend_name();

    // Resume: keep completed items from an existing run with the same config.
    std::set<std::string> completed;
    bool resuming = false;
    if (std::filesystem::exists(out_path) && std::filesystem::file_size(out_path) > 0) {
        auto previous = load_run_record(out_path);
        if (previous.config_hash != run.config_hash) {
            throw ConfigError("existing run file was produced by config " +
                              previous.config_hash + ", not " + run.config_hash);
        }
        run.items = std::move(previous.items);
        for (const auto& item : run.items) completed.insert(item.item_id);
        resuming = true;
    }

    auto test_items = dataset->test();
    std::vector<const corpus::CorpusItem*> todo;
    for (const auto* item : test_items) {
        if (!completed.count(item->id)) todo.push_back(item);
    }
    if (todo.size() > limits.max_items) todo.resize(limits.max_items);

    // The file is rewritten from the header on every flush batch; records
    // append in dataset order so reruns and resumes are byte-stable.
    (void)resuming;
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open run file for writing: " + out_path);
    out << header_json(run).dump() << "\n";
    for (const auto& item : run.items) out << item_to_json(item).dump() << "\n";
    out.flush();

    const size_t workers =
        std::min<size_t>(static_cast<size_t>(std::max(1, config.workers)), todo.size());
    if (workers <= 1) {
        for (const auto* item : todo) {
            auto record = process_item(stage, *item);
            run.items.push_back(record);
            out << item_to_json(record).dump() << "\n";
            out.flush();
        }
    } else {
        std::vector<std::optional<ItemRecord>> results(todo.size());
        std::mutex mutex;
        std::condition_variable ready;
        std::atomic<size_t> next_index{0};
        std::vector<std::thread> pool;
        for (size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                while (true) {
                    size_t i = next_index.fetch_add(1);
                    if (i >= todo.size()) break;
                    auto record = process_item(stage, *todo[i]);
                    {
                        std::lock_guard<std::mutex> lock(mutex);
                        results[i] = std::move(record);
                    }
                    ready.notify_one();
                }
            });
        }
        size_t flushed = 0;
        {
            std::unique_lock<std::mutex> lock(mutex);
            while (flushed < todo.size()) {
                ready.wait(lock, [&] { return results[flushed].has_value(); });
                while (flushed < todo.size() && results[flushed]) {
                    run.items.push_back(*results[flushed]);
                    out << item_to_json(*results[flushed]).dump() << "\n";
                    out.flush();
                    results[flushed].reset();
                    ++flushed;
                }
            }
        }
        for (auto& t : pool) t.join();
    }

    recompute_call_totals(run);
    out << footer_json(run).dump() << "\n";
    out.flush();
    return run;
}

}  // namespace autoform::pipeline
