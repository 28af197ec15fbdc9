#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "autoform/autosef.hpp"
#include "autoform/checker.hpp"
#include "autoform/corpus.hpp"
#include "autoform/denoise.hpp"
#include "autoform/http_provider.hpp"
#include "autoform/isabelle_client.hpp"
#include "autoform/llm.hpp"
#include "autoform/metrics.hpp"
#include "autoform/retrieval.hpp"

namespace autoform::pipeline {

struct ConfigError : Error {
    using Error::Error;
};

/// One provider slot in the role matrix.
struct ProviderConfig {
    std::string type = "oracle";  // oracle | scripted | http
    llm::NoiseSpec noise;         // oracle
    bool pbd_1a_bias = true;      // oracle
    std::string script_path;      // scripted: JSON object prompt -> response
    llm::HttpProviderConfig http; // http
};

struct ExperimentConfig {
    std::string dataset_path;

    retrieval::QueryMode query_mode;
    retrieval::IndexMode index_mode;
    int shots = 3;  // 0 bypasses retrieval
    retrieval::Bm25Params bm25;

    ProviderConfig autoformalize_provider;
    ProviderConfig informalize_provider;
    ProviderConfig denoise_provider;
    ProviderConfig repair_provider;

    std::optional<denoise::DenoiseMode> denoise_mode;
    std::string fixed_exemplars_path;  // required by PBD variant 1C

    int autosef_budget = 9;  // 0 disables stage 3
    bool fixed_iterations = false;
    bool regression_guard = true;

    std::string checker_backend = "offline";  // offline | isabelle
    std::string symbols_path;
    std::string phrases_path;
    checker::IsabelleServerConfig isabelle;

    bool with_cbs = false;  // deterministic hash embedder
    uint64_t seed = 0;
    int workers = 1;
    std::string templates_dir;  // empty = builtin templates

    void validate() const;
    std::string canonical_json() const;
    std::string hash() const;

    static ExperimentConfig from_json_text(std::string_view text);
    static ExperimentConfig load(const std::string& path);
    std::string to_json_text() const;
};

struct PromptRef {
    std::string family;
    std::string id;  // content hash
    std::string text;

    bool operator==(const PromptRef&) const = default;
};

struct ItemRecord {
    std::string item_id;
    std::string status = "ok";  // ok | failed
    std::string error;
    std::string query;
    std::string zero_shot;
    std::vector<retrieval::RetrievalHit> hits;
    std::vector<PromptRef> prompts;
    std::string raw_output;
    std::string denoised_output;
    bool pbd_failed = false;
    std::optional<autosef::RefinementTrace> trace;
    std::string final_output;
    std::optional<metrics::MetricVector> scores;
    size_t provider_calls = 0;
    double latency_ms = 0;  // volatile: excluded from record hashing

    bool operator==(const ItemRecord&) const = default;
};

struct RunRecord {
    std::string config_hash;
    std::string config_json;  // canonical form
    std::vector<ItemRecord> items;
    size_t zero_shot_calls = 0;
    size_t autoformalize_calls = 0;
    size_t denoise_calls = 0;
    size_t repair_calls = 0;
    std::string checker_backend = "offline";

    size_t failed_items() const;
};

/// Serialization: header line, one item per line, footer line.
std::string run_record_to_jsonl(const RunRecord& run);
RunRecord run_record_from_jsonl(std::string_view text, std::vector<std::string>* warnings = nullptr);
void save_run_record(const RunRecord& run, const std::string& path);
RunRecord load_run_record(const std::string& path, std::vector<std::string>* warnings = nullptr);

/// Content hash with volatile fields (latency) stripped.
std::string run_record_hash(const RunRecord& run);

/// Rebuilds the footer call totals from the item records.
void recompute_call_totals(RunRecord& run);

struct RunLimits {
    size_t max_items = SIZE_MAX;  // stop early (tests simulate a crash)
};

/// Executes the three stages over the dataset's test split, appending each
/// finished item to `out_path` in dataset order. When the file already
/// holds a partial run with the same config hash, completed items are kept
/// and the run resumes after them.
RunRecord run_experiment(const ExperimentConfig& config, const std::string& out_path,
                         const RunLimits& limits = {});

/// Builders shared with the CLI.
std::unique_ptr<llm::Provider> make_provider(const ProviderConfig& config,
                                             std::shared_ptr<const corpus::Dataset> dataset);
std::unique_ptr<checker::Checker> make_checker(const ExperimentConfig& config);

}  // namespace autoform::pipeline
