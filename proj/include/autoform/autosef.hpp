#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "autoform/checker.hpp"
#include "autoform/llm.hpp"
#include "autoform/prompts.hpp"

namespace autoform::autosef {

enum class StopReason { clean, budget_exhausted, provider_error, no_change_twice };

std::string_view stop_reason_name(StopReason reason);

struct Iteration {
    std::string code;       // code in effect after this iteration
    std::string attempted;  // provider output, kept or not; equals code for iteration 0
    std::vector<checker::SyntaxDiagnostic> diagnostics;  // for `code`
    std::string prompt_id;  // hash of the rendered repair prompt, "" for iteration 0
    bool changed = false;

    bool operator==(const Iteration&) const = default;
};

struct RefinementTrace {
    std::vector<Iteration> iterations;  // iterations[0] holds the input code
    StopReason stop_reason = StopReason::clean;
    size_t provider_calls = 0;

    const std::string& final_code() const { return iterations.back().code; }
    int final_error_count() const {
        return checker::count_errors(iterations.back().diagnostics);
    }

    bool operator==(const RefinementTrace&) const = default;
};

struct RunOptions {
    int budget = 9;
    /// Disables the two-unchanged-iterations early stop so the loop runs
    /// the full budget, as in the published nine-cycle setting.
    bool fixed_iterations = false;
    /// Keep the previous code when a refinement increases the number of
    /// error diagnostics; the attempt is still recorded.
    bool regression_guard = true;
};

/// One repair round: renders the repair prompt with only the first
/// error-severity diagnostic, calls the provider and returns its output
/// passed through code-based denoising.
std::string refine_once(llm::Provider& provider,
                        const std::vector<prompts::Exemplar>& exemplars,
                        const std::vector<checker::SyntaxDiagnostic>& diagnostics,
                        std::string_view code,
                        const prompts::TemplateSet& templates = prompts::TemplateSet::builtin(),
                        std::string* prompt_id = nullptr);

/// Full refinement loop: check, stop when clean, otherwise refine, up to
/// `budget` provider calls. Every iteration's code and diagnostics are
/// recorded; a provider failure ends the trace with the last good code.
RefinementTrace run(llm::Provider& provider, checker::Checker& checker,
                    const std::vector<prompts::Exemplar>& exemplars, std::string_view code,
                    const RunOptions& options = {},
                    const prompts::TemplateSet& templates = prompts::TemplateSet::builtin());

}  // namespace autoform::autosef
