#include "autoform/autosef.hpp"

#include "autoform/denoise.hpp"
#include "autoform/util.hpp"

namespace autoform::autosef {

std::string_view stop_reason_name(StopReason reason) {
    switch (reason) {
        case StopReason::clean: return "clean";
        case StopReason::budget_exhausted: return "budget_exhausted";
        case StopReason::provider_error: return "provider_error";
        case StopReason::no_change_twice: return "no_change_twice";
    }
    return "clean";
}

namespace {

const checker::SyntaxDiagnostic& first_error(
    const std::vector<checker::SyntaxDiagnostic>& diagnostics) {
    for (const auto& d : diagnostics) {
        if (d.severity == checker::Severity::error) return d;
    }
    throw prompts::MissingDiagnosticError("refine_once: no error diagnostic to report");
}

}  // namespace

std::string refine_once(llm::Provider& provider,
                        const std::vector<prompts::Exemplar>& exemplars,
                        const std::vector<checker::SyntaxDiagnostic>& diagnostics,
                        std::string_view code, const prompts::TemplateSet& templates,
                        std::string* prompt_id) {
    if (diagnostics.empty()) {
        throw prompts::MissingDiagnosticError("refine_once: diagnostics required");
    }
    auto prompt = templates.render_autosef(exemplars, first_error(diagnostics), code);
    if (prompt_id) *prompt_id = hex64(fnv1a64(prompt.text));
    llm::CompletionRequest request{prompt.text, {}, provider.name()};
    auto result = provider.complete(request);
    return denoise::cbd(result.text);
}

RefinementTrace run(llm::Provider& provider, checker::Checker& checker_backend,
                    const std::vector<prompts::Exemplar>& exemplars, std::string_view code,
                    const RunOptions& options, const prompts::TemplateSet& templates) {
    if (options.budget < 1) throw Error("autosef: budget must be at least 1");
    RefinementTrace trace;
    std::string current(code);
    auto diagnostics = checker_backend.check(current);
    trace.iterations.push_back({current, current, diagnostics, "", false});

    int unchanged_streak = 0;
    while (true) {
        if (checker::count_errors(diagnostics) == 0) {
            trace.stop_reason = StopReason::clean;
            break;
        }
        if (trace.provider_calls >= static_cast<size_t>(options.budget)) {
            trace.stop_reason = StopReason::budget_exhausted;
            break;
        }
        if (!options.fixed_iterations && unchanged_streak >= 2) {
            trace.stop_reason = StopReason::no_change_twice;
            break;
        }
        std::string prompt_id;
        std::string attempted;
        try {
            attempted = refine_once(provider, exemplars, diagnostics, current, templates,
                                    &prompt_id);
            ++trace.provider_calls;
        } catch (const llm::ProviderError&) {
            ++trace.provider_calls;
            trace.stop_reason = StopReason::provider_error;
            break;
        }
        auto attempted_diagnostics = checker_backend.check(attempted);
        std::string kept = attempted;
        auto kept_diagnostics = attempted_diagnostics;
        if (options.regression_guard &&
            checker::count_errors(attempted_diagnostics) >
                checker::count_errors(diagnostics)) {
            kept = current;
            kept_diagnostics = diagnostics;
        }
        bool changed = kept != current;
        unchanged_streak = changed ? 0 : unchanged_streak + 1;
        trace.iterations.push_back({kept, attempted, kept_diagnostics, prompt_id, changed});
        current = kept;
        diagnostics = kept_diagnostics;
    }
    return trace;
}

}  // namespace autoform::autosef
