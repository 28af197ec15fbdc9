#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "autoform/checker.hpp"
#include "autoform/util.hpp"

namespace autoform::prompts {

struct Exemplar {
    std::string nl;      // natural-language side
    std::string formal;  // formal statement side
    std::string id;      // source item id, may be empty for fixed exemplars
};

enum class Family { informalize, autoformalize, pbd_1a, pbd_1b, pbd_1c, pbd_1d, autosef };

std::string_view family_name(Family family);

enum class PbdVariant { v1a, v1b, v1c, v1d };

Family pbd_family(PbdVariant variant);

struct RenderedPrompt {
    std::string text;
    Family family = Family::autoformalize;
    std::vector<std::string> exemplar_ids;
};

struct EmptyInputError : Error {
    using Error::Error;
};

struct MissingExemplarsError : Error {
    using Error::Error;
};

struct MissingDiagnosticError : Error {
    using Error::Error;
};

struct TemplateError : Error {
    using Error::Error;
};

/// The prompt templates, editable as plain-text files with {slot}
/// placeholders. builtin() carries the shipped defaults; load_dir() reads
/// the same file set from a directory so prompts can change without a
/// rebuild.
class TemplateSet {
public:
    static const TemplateSet& builtin();
    static TemplateSet load_dir(const std::string& dir);

    /// File names inside a template directory.
    static const std::vector<std::string>& file_names();

    RenderedPrompt render_informalization(std::string_view formal_statement) const;
    RenderedPrompt render_autoformalization(const std::vector<Exemplar>& exemplars,
                                            std::string_view nl_text) const;
    RenderedPrompt render_pbd(PbdVariant variant, const std::vector<Exemplar>& exemplars,
                              std::string_view code) const;
    RenderedPrompt render_autosef(const std::vector<Exemplar>& exemplars,
                                  const checker::SyntaxDiagnostic& diagnostic,
                                  std::string_view code) const;

    const std::string& raw(const std::string& file_name) const;

    /// "Error at line {L}, offset {C}: {message}".
    static std::string format_error_details(const checker::SyntaxDiagnostic& diagnostic);

private:
    std::map<std::string, std::string> templates_;
};

/// Convenience wrappers over the builtin template set.
RenderedPrompt render_informalization(std::string_view formal_statement);
RenderedPrompt render_autoformalization(const std::vector<Exemplar>& exemplars,
                                        std::string_view nl_text);
RenderedPrompt render_pbd(PbdVariant variant, const std::vector<Exemplar>& exemplars,
                          std::string_view code);
RenderedPrompt render_autosef(const std::vector<Exemplar>& exemplars,
                              const checker::SyntaxDiagnostic& diagnostic,
                              std::string_view code);

/// Versioned fixed exemplar statements for PBD variant 1C.
std::vector<Exemplar> load_fixed_exemplars(const std::string& path);

}  // namespace autoform::prompts
