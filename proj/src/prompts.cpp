#include "autoform/prompts.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace autoform::prompts {

std::string_view family_name(Family family) {
    switch (family) {
        case Family::informalize: return "informalize";
        case Family::autoformalize: return "autoformalize";
        case Family::pbd_1a: return "pbd_1a";
        case Family::pbd_1b: return "pbd_1b";
        case Family::pbd_1c: return "pbd_1c";
        case Family::pbd_1d: return "pbd_1d";
        case Family::autosef: return "autosef";
    }
    return "autoformalize";
}

Family pbd_family(PbdVariant variant) {
    switch (variant) {
        case PbdVariant::v1a: return Family::pbd_1a;
        case PbdVariant::v1b: return Family::pbd_1b;
        case PbdVariant::v1c: return Family::pbd_1c;
        case PbdVariant::v1d: return Family::pbd_1d;
    }
    return Family::pbd_1a;
}

namespace {

constexpr const char* kInformalize =
    "Translate the following Isabelle/ZF code:\n"
    "{statement}\n"
    "into a natural language version statement as brief as possible:";

constexpr const char* kAutoformalizeBlock =
    "Natural language version: {natural_language}\n"
    "Translate the natural language version to an Isabelle/ZF version without any additional "
    "text and do not give any proof: {formal}";

constexpr const char* kPbdBase =
    "You are an expert in Isabelle theorem prover. You will be provided with an Isabelle/ZF "
    "code generated by a language model. Your task is to clean the provided Isabelle/ZF code "
    "with following instructions. Instructions:\n"
    "1. The provided code might contain several lemmas or definitions or theorems. The cleaned "
    "code must only keep the best one lemma or definition or theorem.\n"
    "2. Do not write any proof and if there is a proof in the provided code, remove it from "
    "the cleaned code.\n"
    "3. You should only output tokens that compose the cleaned code. Anything else, including "
    "but not limited to note, description, explanation and comment, must be removed from the "
    "final answer. Giving any additional text is prohibited.\n"
    "{style_instruction}"
    "Strictly follow the instructions that I have claimed.\n"
    "Provided Isabelle/ZF Code: {code}\n"
    "Cleaned Code: ";

constexpr const char* kPbdStyle =
    "4. The cleaned code must have the same style and usage of operators as the original "
    "provided code. Operators usually start with \"\\\" such as \"\\<in>\", \"\\<cdot>\".\n";

constexpr const char* kPbdStyleExamples =
    "4. The cleaned code must have the same style and usage of operators as the original "
    "provided code. Operators usually start with \"\\\" such as \"\\<in>\", \"\\<cdot>\". Here "
    "are some additional Isabelle/ZF code examples which have the same style as the original "
    "provided code:\n"
    "{exemplar_statements}\n";

constexpr const char* kAutosef =
    "You are an expert in Isabelle theorem prover. You will be provided with an Isabelle/ZF "
    "code generated by a language model. The provided code has some Isabelle/ZF syntax errors "
    "according to the Isabelle prover. You will also be provided with the error details and "
    "where the error code is located in the code. Your task is to fix related errors in the "
    "provided Isabelle/ZF code with following instructions. Instructions:\n"
    "1. Only refine the code part which is related to provided error details. You must keep "
    "other code parts unchanged.\n"
    "2. The syntax errors might cause by the mismatch of brackets, incorrect using of "
    "operators or invalid representation of Isabelle/ZF code. You should only refine the "
    "error codes based on the error details by rewriting, fixing or removing error codes.\n"
    "3. You should only output tokens that compose the cleaned code. Anything else, including "
    "but not limited to note, description, explanation and comment, must be removed from the "
    "final answer. Giving any additional text is prohibited.\n"
    "4. The cleaned code must have the same style and usage of operators as the original "
    "provided code. Operators usually start with \"\\\" such as \"\\<in>\", \"\\<cdot>\". Here "
    "are some additional Isabelle/ZF code examples which have the same style as the original "
    "provided code:\n"
    "{exemplar_statements}\n"
    "Strictly follow the instructions that I have claimed.\n"
    "Provided Isabelle/ZF Code:\n"
    "{code}\n"
    "{error_details}\n"
    "Refined Code: ";

std::string substitute(std::string_view tmpl,
                       const std::map<std::string, std::string>& slots) {
    std::string out;
    out.reserve(tmpl.size());
    size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            size_t close = tmpl.find('}', i);
            if (close == std::string_view::npos) {
                throw TemplateError("unterminated placeholder in template");
            }
            std::string name(tmpl.substr(i + 1, close - i - 1));
            auto it = slots.find(name);
            if (it == slots.end()) {
                throw TemplateError("unresolved placeholder {" + name + "}");
            }
            out += it->second;
            i = close + 1;
            continue;
        }
        out += tmpl[i++];
    }
    return out;
}

std::string join_statements(const std::vector<Exemplar>& exemplars) {
    std::string out;
    for (size_t i = 0; i < exemplars.size(); ++i) {
        if (i) out += '\n';
        out += exemplars[i].formal;
    }
    return out;
}

std::vector<std::string> exemplar_ids(const std::vector<Exemplar>& exemplars) {
    std::vector<std::string> ids;
    ids.reserve(exemplars.size());
    for (const auto& e : exemplars) ids.push_back(e.id);
    return ids;
}

}  // namespace

const std::vector<std::string>& TemplateSet::file_names() {
    static const std::vector<std::string> names = {
        "informalize.txt",   "autoformalize.txt",      "pbd_base.txt",
        "pbd_style.txt",     "pbd_style_examples.txt", "autosef.txt"};
    return names;
}

const TemplateSet& TemplateSet::builtin() {
    static const TemplateSet set = [] {
        TemplateSet s;
        s.templates_["informalize.txt"] = kInformalize;
        s.templates_["autoformalize.txt"] = kAutoformalizeBlock;
        s.templates_["pbd_base.txt"] = kPbdBase;
        s.templates_["pbd_style.txt"] = kPbdStyle;
        s.templates_["pbd_style_examples.txt"] = kPbdStyleExamples;
        s.templates_["autosef.txt"] = kAutosef;
        return s;
    }();
    return set;
}

TemplateSet TemplateSet::load_dir(const std::string& dir) {
    TemplateSet set;
    for (const auto& name : file_names()) {
        std::ifstream in(dir + "/" + name, std::ios::binary);
        if (!in) throw TemplateError("missing template file: " + dir + "/" + name);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        std::string text = buffer.str();
        if (!text.empty() && text.back() == '\n') text.pop_back();
        set.templates_[name] = std::move(text);
    }
    return set;
}

const std::string& TemplateSet::raw(const std::string& file_name) const {
    auto it = templates_.find(file_name);
    if (it == templates_.end()) throw TemplateError("unknown template: " + file_name);
    return it->second;
}

std::string TemplateSet::format_error_details(const checker::SyntaxDiagnostic& diagnostic) {
    return "Error at line " + std::to_string(diagnostic.line) + ", offset " +
           std::to_string(diagnostic.offset) + ": " + diagnostic.message;
}

RenderedPrompt TemplateSet::render_informalization(std::string_view formal_statement) const {
    if (formal_statement.empty()) throw EmptyInputError("informalization: empty statement");
    RenderedPrompt out;
    out.family = Family::informalize;
    out.text = substitute(raw("informalize.txt"), {{"statement", std::string(formal_statement)}});
    return out;
}

RenderedPrompt TemplateSet::render_autoformalization(const std::vector<Exemplar>& exemplars,
                                                     std::string_view nl_text) const {
    RenderedPrompt out;
    out.family = Family::autoformalize;
    out.exemplar_ids = exemplar_ids(exemplars);
    const auto& block = raw("autoformalize.txt");
    std::string text;
    for (const auto& e : exemplars) {
        text += substitute(block, {{"natural_language", e.nl}, {"formal", e.formal}});
        text += '\n';
    }
    text += substitute(block, {{"natural_language", std::string(nl_text)}, {"formal", ""}});
    out.text = std::move(text);
    return out;
}

RenderedPrompt TemplateSet::render_pbd(PbdVariant variant, const std::vector<Exemplar>& exemplars,
                                       std::string_view code) const {
    if ((variant == PbdVariant::v1c || variant == PbdVariant::v1d) && exemplars.empty()) {
        throw MissingExemplarsError("pbd: variants 1C and 1D require exemplar statements");
    }
    std::string style;
    switch (variant) {
        case PbdVariant::v1a: style = ""; break;
        case PbdVariant::v1b: style = raw("pbd_style.txt"); break;
        case PbdVariant::v1c:
        case PbdVariant::v1d:
            style = substitute(raw("pbd_style_examples.txt"),
                               {{"exemplar_statements", join_statements(exemplars)}});
            break;
    }
    RenderedPrompt out;
    out.family = pbd_family(variant);
    if (variant == PbdVariant::v1c || variant == PbdVariant::v1d) {
        out.exemplar_ids = exemplar_ids(exemplars);
    }
    out.text = substitute(raw("pbd_base.txt"),
                          {{"style_instruction", style}, {"code", std::string(code)}});
    return out;
}

RenderedPrompt TemplateSet::render_autosef(const std::vector<Exemplar>& exemplars,
                                           const checker::SyntaxDiagnostic& diagnostic,
                                           std::string_view code) const {
    if (exemplars.empty()) {
        throw MissingExemplarsError("autosef: exemplar statements required");
    }
    RenderedPrompt out;
    out.family = Family::autosef;
    out.exemplar_ids = exemplar_ids(exemplars);
    out.text = substitute(raw("autosef.txt"),
                          {{"exemplar_statements", join_statements(exemplars)},
                           {"code", std::string(code)},
                           {"error_details", format_error_details(diagnostic)}});
    return out;
}

RenderedPrompt render_informalization(std::string_view formal_statement) {
    return TemplateSet::builtin().render_informalization(formal_statement);
}

RenderedPrompt render_autoformalization(const std::vector<Exemplar>& exemplars,
                                        std::string_view nl_text) {
    return TemplateSet::builtin().render_autoformalization(exemplars, nl_text);
}

RenderedPrompt render_pbd(PbdVariant variant, const std::vector<Exemplar>& exemplars,
                          std::string_view code) {
    return TemplateSet::builtin().render_pbd(variant, exemplars, code);
}

RenderedPrompt render_autosef(const std::vector<Exemplar>& exemplars,
                              const checker::SyntaxDiagnostic& diagnostic,
                              std::string_view code) {
    return TemplateSet::builtin().render_autosef(exemplars, diagnostic, code);
}

std::vector<Exemplar> load_fixed_exemplars(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TemplateError("cannot open fixed exemplar file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw TemplateError("fixed exemplar file is not valid JSON: " + std::string(e.what()));
    }
    if (!j.contains("statements") || !j["statements"].is_array() || j["statements"].empty()) {
        throw TemplateError("fixed exemplar file needs a non-empty 'statements' array");
    }
    std::vector<Exemplar> out;
    size_t index = 1;
    for (const auto& s : j["statements"]) {
        Exemplar e;
        e.formal = s.get<std::string>();
        e.id = "fixed" + std::to_string(index++);
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace autoform::prompts
