#include "autoform/llm.hpp"

#include <algorithm>

#include "autoform/scan.hpp"

namespace autoform::llm {

CompletionResult ScriptedProvider::complete(const CompletionRequest& request) {
    record_call();
    auto it = responses_.find(request.prompt);
    if (it == responses_.end()) {
        throw ProviderUnavailableError("unscripted prompt");
    }
    return {it->second, 0.0, std::nullopt, std::nullopt, "scripted"};
}

uint64_t item_salt(std::string_view item_id) { return fnv1a64(item_id); }

namespace {

const std::vector<std::string>& explanation_texts() {
    static const std::vector<std::string> texts = {
        "Note: This lemma assumes that the carrier set is nonempty, but it is not explicitly "
        "stated in the natural language version.",
        "This formalization follows the style and the operators of the provided examples.",
        "The definition of the auxiliary predicate should be provided before using this "
        "lemma.",
        "Explanation: the assumptions state the membership conditions required for the "
        "conclusion to hold.",
        "Note that the conclusion follows directly from the definitions involved."};
    return texts;
}

// Deliberately CBD-resistant: the quoted formula keeps the line from being
// classified as prose, so recovery fails and the case lands in the logged
// rule-gap budget.
const std::string& tricky_explanation() {
    static const std::string text =
        "Note: the assumption \"x \\<in> X\" is left implicit in the original statement.";
    return text;
}

const std::vector<std::string>& proof_texts() {
    static const std::vector<std::string> texts = {
        "proof -\n  from assms show ?thesis by auto\nqed",
        "proof\n  show ?thesis using assms by blast\nqed",
        "by simp",
        "using assms by auto",
        "apply (rule refl)\napply simp\ndone"};
    return texts;
}

}  // namespace

std::string apply_noise_subset(std::string_view statement, const std::vector<NoiseEdit>& edits,
                               uint64_t mask, std::string_view appended) {
    std::string text(statement);
    for (size_t idx = edits.size(); idx-- > 0;) {
        if (!(mask & (uint64_t{1} << idx))) continue;
        const auto& edit = edits[idx];
        text.replace(edit.begin, edit.end - edit.begin, edit.replacement);
    }
    text += appended;
    return text;
}

NoisyStatement apply_noise(std::string_view statement, const NoiseSpec& spec,
                           uint64_t item_salt_value) {
    NoisyStatement out;
    SplitMix64 rng(spec.seed ^ (item_salt_value * 0x9e3779b97f4a7c15ULL));

    // Draw order is fixed: symbol corruptions left to right, bracket drops
    // left to right, then the appended blocks.
    if (spec.corrupt_symbol_rate > 0.0) {
        size_t pos = 0;
        while ((pos = statement.find("\\<in>", pos)) != std::string_view::npos) {
            if (rng.next_unit() < spec.corrupt_symbol_rate) {
                out.edits.push_back({pos, pos + 5, "::", "symbol style corruption"});
            }
            pos += 5;
        }
    }
    if (spec.drop_bracket_rate > 0.0) {
        auto regions = scan::scan_regions(statement);
        for (const auto& quote : regions.quotes) {
            for (size_t i = quote.begin + 1; i + 1 < quote.end; ++i) {
                char c = statement[i];
                if (c == '(' || c == ')' || c == '[' || c == ']' || c == '{' || c == '}') {
                    if (rng.next_unit() < spec.drop_bracket_rate) {
                        out.edits.push_back({i, i + 1, "", "dropped bracket"});
                    }
                }
            }
        }
    }
    std::sort(out.edits.begin(), out.edits.end(),
              [](const NoiseEdit& a, const NoiseEdit& b) { return a.begin < b.begin; });

    if (spec.append_proof) {
        out.appended += "\n";
        out.appended += proof_texts()[rng.next_below(proof_texts().size())];
    }
    if (spec.append_explanation) {
        out.appended += "\n";
        if (rng.next_below(100) < 3) {
            out.appended += tricky_explanation();
        } else {
            out.appended += explanation_texts()[rng.next_below(explanation_texts().size())];
        }
    }

    uint64_t full_mask = out.edits.size() >= 64 ? ~uint64_t{0}
                                                : (uint64_t{1} << out.edits.size()) - 1;
    out.text = apply_noise_subset(statement, out.edits, full_mask, out.appended);
    return out;
}

OracleProvider::OracleProvider(std::shared_ptr<const corpus::Dataset> dataset, NoiseSpec noise,
                               bool pbd_1a_bias)
    : dataset_(std::move(dataset)), noise_(noise), pbd_1a_bias_(pbd_1a_bias) {}

const corpus::CorpusItem* OracleProvider::find_by_comment(std::string_view comment) const {
    for (const auto& item : dataset_->items) {
        if (!item.comment.empty() && item.comment == comment) return &item;
    }
    return nullptr;
}

const corpus::CorpusItem* OracleProvider::find_by_code(std::string_view code) const {
    // Noise edits live inside quoted formulas and appended suffixes, so the
    // longest shared prefix with a ground-truth statement identifies the item.
    const corpus::CorpusItem* best = nullptr;
    size_t best_len = 0;
    for (const auto& item : dataset_->items) {
        const std::string& truth = item.formal_statement;
        size_t len = 0;
        while (len < truth.size() && len < code.size() && truth[len] == code[len]) ++len;
        if (len > best_len) {
            best_len = len;
            best = &item;
        }
    }
    if (best_len < 8) return nullptr;
    return best;
}

namespace {

std::string_view slice_between(std::string_view text, std::string_view after,
                               std::string_view before) {
    auto start = text.find(after);
    if (start == std::string_view::npos) return {};
    start += after.size();
    auto end = text.find(before, start);
    if (end == std::string_view::npos) end = text.size();
    return text.substr(start, end - start);
}

}  // namespace

std::string OracleProvider::answer_informalize(const std::string& prompt) const {
    auto statement = slice_between(prompt, "Translate the following Isabelle/ZF code:\n",
                                   "\ninto a natural language version");
    for (const auto& item : dataset_->items) {
        if (item.formal_statement == statement) {
            if (!item.comment.empty()) return item.comment;
            return "a formal statement named " + (item.name.empty() ? item.id : item.name);
        }
    }
    return "a formal statement (" + hex64(fnv1a64(statement)).substr(0, 8) + ")";
}

std::string OracleProvider::answer_autoformalize(const std::string& prompt) const {
    const std::string marker = "Natural language version: ";
    auto start = prompt.rfind(marker);
    if (start == std::string::npos) {
        throw ProviderUnavailableError("oracle: malformed autoformalization prompt");
    }
    start += marker.size();
    auto end = prompt.find("\nTranslate the natural language version", start);
    if (end == std::string::npos) {
        throw ProviderUnavailableError("oracle: malformed autoformalization prompt");
    }
    std::string nl = prompt.substr(start, end - start);
    const auto* item = find_by_comment(nl);
    if (!item) throw ProviderUnavailableError("oracle: unknown natural-language query");
    return apply_noise(item->formal_statement, noise_, item_salt(item->id)).text;
}

std::string OracleProvider::answer_pbd(const std::string& prompt) const {
    auto code = slice_between(prompt, "Provided Isabelle/ZF Code: ", "\nCleaned Code:");
    const auto* item = find_by_code(code);
    if (!item) throw ProviderUnavailableError("oracle: unknown code in denoising prompt");
    bool has_examples =
        prompt.find("Here are some additional Isabelle/ZF code examples") != std::string::npos;
    bool has_style =
        prompt.find("4. The cleaned code must have the same style") != std::string::npos;
    std::string clean = item->formal_statement;
    if (!has_examples && !has_style && pbd_1a_bias_) {
        // Variant 1A: without the stylistic alignment instruction the model
        // rewrites membership in the style it was trained on.
        std::string biased;
        size_t pos = 0;
        while (true) {
            auto hit = clean.find("\\<in>", pos);
            if (hit == std::string::npos) {
                biased += clean.substr(pos);
                break;
            }
            biased += clean.substr(pos, hit - pos);
            biased += "::";
            pos = hit + 5;
        }
        return biased;
    }
    return clean;
}

std::string OracleProvider::answer_autosef(const std::string& prompt) const {
    auto code = std::string(
        slice_between(prompt, "Provided Isabelle/ZF Code:\n", "\nError at line "));
    auto details = slice_between(prompt, "\nError at line ", "\nRefined Code:");
    const auto* item = find_by_code(code);
    if (!item) return code;

    auto noisy = apply_noise(item->formal_statement, noise_, item_salt(item->id));
    const auto& edits = noisy.edits;
    if (edits.empty()) return item->formal_statement;
    if (edits.size() > 16) return item->formal_statement;

    // Parse "L, offset C: ..." from the error details.
    int line = 1, offset = 0;
    {
        std::string d(details);
        size_t comma = d.find(',');
        if (comma != std::string::npos) {
            line = std::atoi(d.substr(0, comma).c_str());
            auto off_pos = d.find("offset ", comma);
            if (off_pos != std::string::npos) {
                offset = std::atoi(d.substr(off_pos + 7).c_str());
            }
        }
    }

    const uint64_t mask_count = uint64_t{1} << edits.size();
    for (uint64_t mask = 0; mask < mask_count; ++mask) {
        for (std::string_view appended : {std::string_view{}, std::string_view(noisy.appended)}) {
            if (apply_noise_subset(item->formal_statement, edits, mask, appended) != code)
                continue;
            // Map the diagnostic to the applied edit closest to it in the
            // current code, then revert exactly that edit.
            LineIndex lines(code);
            size_t diag_offset = lines.offset_of(line, offset);
            long shift = 0;
            size_t best_idx = edits.size();
            size_t best_distance = code.size() + 1;
            for (size_t i = 0; i < edits.size(); ++i) {
                if (!(mask & (uint64_t{1} << i))) continue;
                size_t current_begin = static_cast<size_t>(
                    static_cast<long>(edits[i].begin) + shift);
                size_t distance = current_begin > diag_offset ? current_begin - diag_offset
                                                              : diag_offset - current_begin;
                if (distance < best_distance) {
                    best_distance = distance;
                    best_idx = i;
                }
                shift += static_cast<long>(edits[i].replacement.size()) -
                         static_cast<long>(edits[i].end - edits[i].begin);
            }
            if (best_idx == edits.size()) return code;
            uint64_t repaired_mask = mask & ~(uint64_t{1} << best_idx);
            return apply_noise_subset(item->formal_statement, edits, repaired_mask, "");
        }
    }
    return code;
}

CompletionResult OracleProvider::complete(const CompletionRequest& request) {
    record_call();
    const std::string& p = request.prompt;
    std::string text;
    if (p.rfind("Translate the following Isabelle/ZF code:", 0) == 0) {
        text = answer_informalize(p);
    } else if (p.find("fix related errors in the provided Isabelle/ZF code") !=
               std::string::npos) {
        text = answer_autosef(p);
    } else if (p.find("Your task is to clean the provided Isabelle/ZF code") !=
               std::string::npos) {
        text = answer_pbd(p);
    } else if (p.find("Natural language version: ") != std::string::npos) {
        text = answer_autoformalize(p);
    } else {
        throw ProviderUnavailableError("oracle: unrecognized prompt family");
    }
    return {text, 0.0, std::nullopt, std::nullopt, "oracle"};
}

}  // namespace autoform::llm
