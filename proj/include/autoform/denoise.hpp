#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "autoform/llm.hpp"
#include "autoform/prompts.hpp"
#include "autoform/util.hpp"

namespace autoform::denoise {

/// Rule toggles for code-based denoising, one per pipeline stage.
struct CbdOptions {
    bool strip_fences = true;     // R1: markdown fences and language tags
    bool anchor_keyword = true;   // R2: drop text before the first item keyword
    bool truncate_tail = true;    // R3: cut at proof keywords or prose lines
    bool drop_comments = true;    // R4: remove (* ... *) blocks
    bool trim = true;             // R5
};

/// Code-based denoising. Total and conservative: with no item keyword in
/// sight the input comes back trimmed. Idempotent, and never rewrites
/// characters inside the retained statement region.
std::string cbd(std::string_view raw_output, const CbdOptions& options = {});

/// R1 and R4 exposed for the substring-preservation property.
std::string strip_fences(std::string_view text);
std::string drop_comments(std::string_view text);

struct DenoiseMode {
    std::optional<prompts::PbdVariant> pbd_variant;
    bool apply_cbd = true;

    bool valid() const { return pbd_variant.has_value() || apply_cbd; }
    std::string label() const;
    /// Accepts "cbd", "1A".."1D", "1A+cbd".."1D+cbd" (case-insensitive).
    static DenoiseMode parse(std::string_view label);
};

/// Prompt-based denoising: renders the variant prompt and returns the
/// provider text verbatim. CBD composition is the caller's decision.
std::string pbd(llm::Provider& provider, prompts::PbdVariant variant,
                const std::vector<prompts::Exemplar>& exemplars, std::string_view raw_output,
                const prompts::TemplateSet& templates = prompts::TemplateSet::builtin());

struct DenoiseResult {
    std::string text;
    bool pbd_failed = false;
    std::string pbd_error;
};

/// Full stage-2 composition (PBD first when configured, then CBD). A PBD
/// provider failure degrades to the CBD-only result and flags the item.
DenoiseResult denoise(llm::Provider* provider, const DenoiseMode& mode,
                      const std::vector<prompts::Exemplar>& exemplars,
                      std::string_view raw_output,
                      const prompts::TemplateSet& templates = prompts::TemplateSet::builtin());

}  // namespace autoform::denoise
