#pragma once

#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "autoform/util.hpp"

namespace autoform::checker {

enum class Severity { error, warning };

struct SyntaxDiagnostic {
    int line = 1;        // 1-based
    int offset = 0;      // 0-based column within the line, in bytes
    int end_offset = -1; // exclusive, -1 when unknown
    std::string message;
    Severity severity = Severity::error;

    bool operator==(const SyntaxDiagnostic&) const = default;
};

inline int count_errors(const std::vector<SyntaxDiagnostic>& diagnostics) {
    int n = 0;
    for (const auto& d : diagnostics) {
        if (d.severity == Severity::error) ++n;
    }
    return n;
}

/// True when the list carries no error-severity entries.
inline bool passes(const std::vector<SyntaxDiagnostic>& diagnostics) {
    return count_errors(diagnostics) == 0;
}

struct CheckContext {
    std::string session = "ZF";
    std::vector<std::string> imports = {"ZF"};
    std::string whitelist_version = "1";
    std::set<std::string> symbols;          // allowed \<...> names, e.g. "in", "Union"
    std::set<std::string> phrases;          // allowed brace phrases, e.g. "is a topology"
    bool unknown_symbol_is_warning = false; // downgrade unknown \<...> tokens
};

/// Loads a whitelist file: one entry per line, '#' starts a comment.
/// Symbol entries may be written bare ("in") or delimited ("\<in>").
std::set<std::string> load_symbol_whitelist(const std::string& path);

/// Loads a brace-phrase whitelist: one phrase per line, braces optional.
std::set<std::string> load_phrase_whitelist(const std::string& path);

struct BackendUnavailableError : Error {
    using Error::Error;
};

/// Syntax checker contract. Both backends return diagnostics ordered by
/// (line, offset); an empty error set means the statement passes.
class Checker {
public:
    virtual ~Checker() = default;
    virtual std::vector<SyntaxDiagnostic> check(std::string_view statement) = 0;
    virtual std::string backend_name() const = 0;
};

/// Deterministic offline surface-syntax validator for Isabelle/ZF statements.
std::vector<SyntaxDiagnostic> offline_validate(std::string_view statement,
                                               const CheckContext& context);

class OfflineChecker final : public Checker {
public:
    explicit OfflineChecker(CheckContext context) : context_(std::move(context)) {}

    std::vector<SyntaxDiagnostic> check(std::string_view statement) override {
        return offline_validate(statement, context_);
    }
    std::string backend_name() const override { return "offline"; }

    const CheckContext& context() const { return context_; }

private:
    CheckContext context_;
};

/// Wraps a bare statement into a compilable theory so a real prover checks
/// only its syntax. The statement is left unproved via "oops".
std::string wrap_theory(std::string_view statement, const CheckContext& context);

}  // namespace autoform::checker
