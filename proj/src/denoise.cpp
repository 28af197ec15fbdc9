#include "autoform/denoise.hpp"

#include <algorithm>

#include "autoform/scan.hpp"

namespace autoform::denoise {

namespace {

bool is_kind_word(std::string_view w) {
    return w == "lemma" || w == "theorem" || w == "corollary" || w == "definition";
}

bool is_proof_word(std::string_view w) {
    return w == "proof" || w == "by" || w == "using" || w == "apply" || w == "unfolding";
}

bool only_whitespace_before_on_line(std::string_view text, size_t offset) {
    size_t i = offset;
    while (i > 0 && text[i - 1] != '\n') {
        if (text[i - 1] != ' ' && text[i - 1] != '\t') return false;
        --i;
    }
    return true;
}

// R2: earliest top-level item keyword, preferring line starts.
std::optional<size_t> find_anchor(std::string_view text) {
    auto regions = scan::scan_regions(text);
    std::optional<size_t> first_any;
    for (const auto& word : regions.words) {
        if (!is_kind_word(word.text)) continue;
        if (!first_any) first_any = word.begin;
        if (only_whitespace_before_on_line(text, word.begin)) return word.begin;
    }
    return first_any;
}

// R3: byte offset of the first proof keyword or prose line, if any.
std::optional<size_t> find_tail_cut(std::string_view text) {
    auto regions = scan::scan_regions(text);
    std::optional<size_t> cut;
    for (const auto& word : regions.words) {
        if (is_proof_word(word.text)) {
            cut = word.begin;
            break;
        }
    }
    const size_t first_quote =
        regions.quotes.empty() ? text.size() : regions.quotes.front().begin;
    size_t line_start = 0;
    int line_no = 0;
    while (line_start <= text.size()) {
        size_t line_end = text.find('\n', line_start);
        if (line_end == std::string_view::npos) line_end = text.size();
        ++line_no;
        std::string_view line = text.substr(line_start, line_end - line_start);
        bool candidate = line_no > 1 && line_start > first_quote &&
                         regions.neutral_at(line_start) && !trim(line).empty() &&
                         line.find('"') == std::string_view::npos &&
                         line.find("\\<") == std::string_view::npos &&
                         line.find("(*") == std::string_view::npos &&
                         line.find("*)") == std::string_view::npos;
        if (candidate && (!cut || line_start < *cut)) {
            cut = line_start;
            break;
        }
        if (line_end == text.size()) break;
        line_start = line_end + 1;
    }
    return cut;
}

}  // namespace

std::string strip_fences(std::string_view text) {
    std::string out;
    size_t line_start = 0;
    while (line_start <= text.size()) {
        size_t line_end = text.find('\n', line_start);
        bool last = line_end == std::string_view::npos;
        if (last) line_end = text.size();
        std::string_view line = text.substr(line_start, line_end - line_start);
        std::string trimmed = trim(line);
        if (trimmed.rfind("```", 0) != 0) {
            out += line;
            if (!last) out += '\n';
        }
        if (last) break;
        line_start = line_end + 1;
    }
    return out;
}

std::string drop_comments(std::string_view text) {
    auto regions = scan::scan_regions(text);
    std::string out;
    size_t i = 0;
    for (const auto& span : regions.comments) {
        out += text.substr(i, span.begin - i);
        i = span.end;
    }
    out += text.substr(i);
    return out;
}

std::string cbd(std::string_view raw_output, const CbdOptions& options) {
    std::string text(raw_output);
    if (options.strip_fences) text = strip_fences(text);
    if (options.anchor_keyword) {
        auto anchor = find_anchor(text);
        if (!anchor) return trim(raw_output);
        text = text.substr(*anchor);
    }
    if (options.truncate_tail) {
        auto cut = find_tail_cut(text);
        if (cut) text = text.substr(0, *cut);
    }
    if (options.drop_comments) text = drop_comments(text);
    if (options.trim) text = trim(text);
    return text;
}

std::string DenoiseMode::label() const {
    std::string out;
    if (pbd_variant) {
        switch (*pbd_variant) {
            case prompts::PbdVariant::v1a: out = "1A"; break;
            case prompts::PbdVariant::v1b: out = "1B"; break;
            case prompts::PbdVariant::v1c: out = "1C"; break;
            case prompts::PbdVariant::v1d: out = "1D"; break;
        }
        if (apply_cbd) out += "+cbd";
    } else if (apply_cbd) {
        out = "cbd";
    }
    return out;
}

DenoiseMode DenoiseMode::parse(std::string_view label) {
    std::string s = to_lower(label);
    DenoiseMode mode;
    mode.apply_cbd = false;
    auto plus = s.find('+');
    std::string head = plus == std::string::npos ? s : s.substr(0, plus);
    std::string tail = plus == std::string::npos ? "" : s.substr(plus + 1);
    auto apply_variant = [&mode](const std::string& v) {
        if (v == "1a") mode.pbd_variant = prompts::PbdVariant::v1a;
        else if (v == "1b") mode.pbd_variant = prompts::PbdVariant::v1b;
        else if (v == "1c") mode.pbd_variant = prompts::PbdVariant::v1c;
        else if (v == "1d") mode.pbd_variant = prompts::PbdVariant::v1d;
        else if (v == "cbd") mode.apply_cbd = true;
        else throw Error("unknown denoise mode: " + v);
    };
    if (!head.empty()) apply_variant(head);
    if (!tail.empty()) apply_variant(tail);
    if (!mode.valid()) throw Error("denoise mode selects nothing: " + std::string(label));
    return mode;
}

std::string pbd(llm::Provider& provider, prompts::PbdVariant variant,
                const std::vector<prompts::Exemplar>& exemplars, std::string_view raw_output,
                const prompts::TemplateSet& templates) {
    auto prompt = templates.render_pbd(variant, exemplars, raw_output);
    llm::CompletionRequest request{prompt.text, {}, provider.name()};
    return provider.complete(request).text;
}

DenoiseResult denoise(llm::Provider* provider, const DenoiseMode& mode,
                      const std::vector<prompts::Exemplar>& exemplars,
                      std::string_view raw_output, const prompts::TemplateSet& templates) {
    DenoiseResult result;
    std::string stage = std::string(raw_output);
    if (mode.pbd_variant) {
        if (!provider) throw Error("denoise: PBD variant configured without a provider");
        try {
            stage = pbd(*provider, *mode.pbd_variant, exemplars, stage, templates);
        } catch (const llm::ProviderError& e) {
            result.pbd_failed = true;
            result.pbd_error = e.what();
            stage = std::string(raw_output);
        }
    }
    result.text = mode.apply_cbd || result.pbd_failed ? cbd(stage) : stage;
    return result;
}

}  // namespace autoform::denoise
