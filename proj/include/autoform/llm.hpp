#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "autoform/corpus.hpp"
#include "autoform/util.hpp"

namespace autoform::llm {

struct DecodingConfig {
    double temperature = 0.0;  // 0 = greedy
    int max_tokens = 1024;
    std::vector<std::string> stop_sequences;

    bool greedy() const { return temperature == 0.0; }
};

struct CompletionRequest {
    std::string prompt;
    DecodingConfig decoding;
    std::string provider_name;
};

struct CompletionResult {
    std::string text;
    double latency_ms = 0;
    std::optional<int> prompt_tokens;
    std::optional<int> completion_tokens;
    std::string metadata;
};

struct ProviderError : Error {
    using Error::Error;
};

struct ProviderUnavailableError : ProviderError {
    using ProviderError::ProviderError;
};

struct RateLimitedError : ProviderError {
    RateLimitedError(const std::string& message, double retry_after_s)
        : ProviderError(message), retry_after_s(retry_after_s) {}
    double retry_after_s;
};

struct ContextTooLongError : ProviderError {
    using ProviderError::ProviderError;
};

struct AuthError : ProviderError {
    using ProviderError::ProviderError;
};

/// Text-completion contract shared by every LLM role in the pipeline
/// (autoformalize, informalize, denoise, repair). Implementations must be
/// safe for concurrent complete() calls.
class Provider {
public:
    virtual ~Provider() = default;
    virtual CompletionResult complete(const CompletionRequest& request) = 0;
    virtual std::string name() const = 0;

    uint64_t call_count() const { return calls_.load(); }

protected:
    void record_call() { calls_.fetch_add(1); }

private:
    std::atomic<uint64_t> calls_{0};
};

/// Fixed prompt -> response table. Unknown prompts raise
/// ProviderUnavailableError("unscripted prompt").
class ScriptedProvider final : public Provider {
public:
    explicit ScriptedProvider(std::map<std::string, std::string> responses)
        : responses_(std::move(responses)) {}

    void add(std::string prompt, std::string response) {
        responses_[std::move(prompt)] = std::move(response);
    }

    CompletionResult complete(const CompletionRequest& request) override;
    std::string name() const override { return "scripted"; }

private:
    std::map<std::string, std::string> responses_;
};

/// Models the noise LLMs add to formal statements: trailing explanations,
/// unsolicited proofs, symbol-style corruption (\<in> -> ::) and dropped
/// brackets inside formulas. Seeded and deterministic per item.
struct NoiseSpec {
    bool append_explanation = false;
    bool append_proof = false;
    double corrupt_symbol_rate = 0.0;
    double drop_bracket_rate = 0.0;
    uint64_t seed = 0;

    bool clean() const {
        return !append_explanation && !append_proof && corrupt_symbol_rate == 0.0 &&
               drop_bracket_rate == 0.0;
    }
};

/// One noise edit applied to a ground-truth statement, recorded so a repair
/// oracle can revert it. Spans index into the ground-truth text.
struct NoiseEdit {
    size_t begin = 0;
    size_t end = 0;            // [begin,end) replaced in the ground truth
    std::string replacement;   // "" for a dropped character
    std::string description;
};

struct NoisyStatement {
    std::string text;
    std::vector<NoiseEdit> edits;       // in-statement corruptions, ascending
    std::string appended;               // proof/explanation suffix, may be empty
};

NoisyStatement apply_noise(std::string_view statement, const NoiseSpec& spec,
                           uint64_t item_salt);

/// Applies only the selected subset of edits (bitmask over edits).
std::string apply_noise_subset(std::string_view statement,
                               const std::vector<NoiseEdit>& edits, uint64_t mask,
                               std::string_view appended);

/// Deterministic stand-in for every LLM role. It recognizes the prompt
/// family from the rendered template, resolves the target item from the
/// embedded query or code, and answers from the dataset's ground truth:
///
///   autoformalize  ground truth transformed by the noise spec
///   informalize    the item's comment (or a deterministic placeholder)
///   denoise        the clean statement; variant 1A re-applies the
///                  \<in> -> :: bias so the checker flags it
///   repair         the provided code with exactly the reported error's
///                  noise edit reverted
class OracleProvider final : public Provider {
public:
    OracleProvider(std::shared_ptr<const corpus::Dataset> dataset, NoiseSpec noise,
                   bool pbd_1a_bias = true);

    CompletionResult complete(const CompletionRequest& request) override;
    std::string name() const override { return "oracle"; }

    const NoiseSpec& noise() const { return noise_; }

private:
    std::string answer_autoformalize(const std::string& prompt) const;
    std::string answer_informalize(const std::string& prompt) const;
    std::string answer_pbd(const std::string& prompt) const;
    std::string answer_autosef(const std::string& prompt) const;

    const corpus::CorpusItem* find_by_comment(std::string_view comment) const;
    const corpus::CorpusItem* find_by_code(std::string_view code) const;

    std::shared_ptr<const corpus::Dataset> dataset_;
    NoiseSpec noise_;
    bool pbd_1a_bias_;
};

uint64_t item_salt(std::string_view item_id);

}  // namespace autoform::llm
