#include "autoform/checker.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "autoform/scan.hpp"

namespace autoform::checker {

std::set<std::string> load_symbol_whitelist(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open symbol whitelist: " + path);
    std::set<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::string entry = trim(line);
        if (entry.empty()) continue;
        if (entry.rfind("\\<", 0) == 0 && entry.back() == '>') {
            entry = entry.substr(2, entry.size() - 3);
        }
        out.insert(entry);
    }
    return out;
}

std::set<std::string> load_phrase_whitelist(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open phrase whitelist: " + path);
    std::set<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::string entry = trim(line);
        if (entry.empty()) continue;
        if (entry.front() == '{' && entry.back() == '}') {
            entry = trim(entry.substr(1, entry.size() - 2));
        }
        // normalize internal whitespace
        std::string normalized;
        bool last_space = false;
        for (char c : entry) {
            if (std::isspace(static_cast<unsigned char>(c))) {
                if (!last_space && !normalized.empty()) normalized += ' ';
                last_space = true;
            } else {
                normalized += c;
                last_space = false;
            }
        }
        while (!normalized.empty() && normalized.back() == ' ') normalized.pop_back();
        if (!normalized.empty()) out.insert(normalized);
    }
    return out;
}

namespace {

struct PendingDiagnostic {
    size_t offset;
    size_t end_offset;  // 0 = unknown
    std::string message;
    Severity severity;
};

struct Token {
    enum class Kind { word, quote, punct };
    Kind kind;
    size_t begin;
    size_t end;
    std::string_view word;
    char punct = 0;
};

bool is_kind_word(std::string_view w) {
    return w == "lemma" || w == "theorem" || w == "corollary" || w == "definition";
}

bool is_clause_word(std::string_view w) {
    return w == "assumes" || w == "shows" || w == "defines" || w == "fixes" || w == "where" ||
           w == "for" || w == "obtains";
}

bool is_proof_word(std::string_view w) {
    return w == "proof" || w == "by" || w == "using" || w == "apply" || w == "unfolding" ||
           w == "qed" || w == "oops" || w == "done" || w == "sorry";
}

std::vector<Token> top_level_tokens(std::string_view text, const scan::ScanResult& regions) {
    std::vector<Token> tokens;
    for (const auto& w : regions.words) {
        tokens.push_back({Token::Kind::word, w.begin, w.end, w.text, 0});
    }
    for (const auto& q : regions.quotes) {
        tokens.push_back({Token::Kind::quote, q.begin, q.end, {}, 0});
    }
    for (const auto& p : regions.punct) {
        tokens.push_back({Token::Kind::punct, p.offset, p.offset + 1, {}, p.ch});
    }
    std::sort(tokens.begin(), tokens.end(),
              [](const Token& a, const Token& b) { return a.begin < b.begin; });
    (void)text;
    return tokens;
}

bool is_symbol_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '^';
}

// Header grammar. Lemma-like items need "kind [(in locale)] name :",
// definitions also accept the anonymous and mixfix forms used in
// IsarMathLib. Reports at most one diagnostic to avoid cascades.
void check_header(std::string_view text, const std::vector<Token>& tokens,
                  std::vector<PendingDiagnostic>& diags) {
    if (tokens.empty() || tokens[0].kind != Token::Kind::word || !is_kind_word(tokens[0].word)) {
        diags.push_back({0, 0,
                         "statement must begin with lemma, theorem, corollary or definition",
                         Severity::error});
        return;
    }
    const bool is_definition = tokens[0].word == "definition";
    size_t i = 1;
    // optional (in locale)
    if (i + 3 < tokens.size() && tokens[i].kind == Token::Kind::punct && tokens[i].punct == '(' &&
        tokens[i + 1].kind == Token::Kind::word && tokens[i + 1].word == "in") {
        if (tokens[i + 2].kind != Token::Kind::word || tokens[i + 3].kind != Token::Kind::punct ||
            tokens[i + 3].punct != ')') {
            diags.push_back({tokens[i].begin, 0, "malformed locale qualifier, expected (in name)",
                             Severity::error});
            return;
        }
        i += 4;
    }
    if (is_definition) {
        if (i >= tokens.size()) {
            diags.push_back({text.size(), 0, "definition needs a defining equation",
                             Severity::error});
            return;
        }
        if (tokens[i].kind == Token::Kind::quote) return;  // anonymous definition
        if (tokens[i].kind != Token::Kind::word || is_clause_word(tokens[i].word) ||
            is_proof_word(tokens[i].word)) {
            diags.push_back({tokens[i].begin, tokens[i].end,
                             "definition needs a name or a quoted defining equation",
                             Severity::error});
            return;
        }
        // name [mixfix group] [where] "..."  -- a quote must follow somewhere
        for (size_t j = i + 1; j < tokens.size(); ++j) {
            if (tokens[j].kind == Token::Kind::quote) return;
        }
        diags.push_back({tokens[i].begin, tokens[i].end,
                         "definition has no quoted defining equation", Severity::error});
        return;
    }
    // lemma / theorem / corollary: name then ':' (attributes allowed between)
    if (i >= tokens.size() || tokens[i].kind != Token::Kind::word ||
        is_clause_word(tokens[i].word) || is_proof_word(tokens[i].word) ||
        is_kind_word(tokens[i].word)) {
        size_t at = i < tokens.size() ? tokens[i].begin : text.size();
        diags.push_back({at, 0, "item header needs a name", Severity::error});
        return;
    }
    size_t name_index = i;
    ++i;
    if (i < tokens.size() && tokens[i].kind == Token::Kind::punct && tokens[i].punct == '[') {
        while (i < tokens.size() &&
               !(tokens[i].kind == Token::Kind::punct && tokens[i].punct == ']')) {
            ++i;
        }
        if (i < tokens.size()) ++i;
    }
    if (i >= tokens.size() || tokens[i].kind != Token::Kind::punct || tokens[i].punct != ':') {
        size_t at = i < tokens.size() ? tokens[i].begin : tokens[name_index].end;
        diags.push_back({at, 0, "expected ':' after the item name", Severity::error});
    }
}

void check_clauses(const std::vector<Token>& tokens, std::vector<PendingDiagnostic>& diags) {
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i].kind != Token::Kind::word) continue;
        std::string_view w = tokens[i].word;
        if (w != "assumes" && w != "shows" && w != "defines") continue;
        size_t quotes = 0;
        for (size_t j = i + 1; j < tokens.size(); ++j) {
            if (tokens[j].kind == Token::Kind::word && is_clause_word(tokens[j].word)) break;
            if (tokens[j].kind == Token::Kind::quote) ++quotes;
        }
        if (quotes == 0) {
            diags.push_back({tokens[i].begin, tokens[i].end,
                             "clause '" + std::string(w) + "' needs at least one quoted formula",
                             Severity::error});
        }
    }
}

void check_proof_words(const std::vector<Token>& tokens, std::vector<PendingDiagnostic>& diags) {
    for (const auto& token : tokens) {
        if (token.kind == Token::Kind::word && is_proof_word(token.word)) {
            diags.push_back({token.begin, token.end,
                             "proof text inside statement: '" + std::string(token.word) + "'",
                             Severity::error});
        }
    }
}

void check_prose_lines(std::string_view text, const scan::ScanResult& regions,
                       std::vector<PendingDiagnostic>& diags) {
    // Header lines precede the first quoted formula and may consist of bare
    // words (a definition name with its mixfix annotation); prose can only
    // trail formulas.
    const size_t first_quote =
        regions.quotes.empty() ? text.size() : regions.quotes.front().begin;
    size_t line_start = 0;
    int line_no = 0;
    while (line_start <= text.size()) {
        size_t line_end = text.find('\n', line_start);
        if (line_end == std::string_view::npos) line_end = text.size();
        ++line_no;
        std::string_view line = text.substr(line_start, line_end - line_start);
        bool skip = line_no == 1 || line_start <= first_quote || trim(line).empty() ||
                    !regions.neutral_at(line_start);
        if (!skip) {
            bool has_quote = line.find('"') != std::string_view::npos;
            bool has_symbol = line.find("\\<") != std::string_view::npos;
            bool has_comment = line.find("(*") != std::string_view::npos ||
                               line.find("*)") != std::string_view::npos;
            if (!has_quote && !has_symbol && !has_comment) {
                diags.push_back({line_start, line_end,
                                 "line looks like natural-language prose, not formal code",
                                 Severity::error});
            }
        }
        if (line_end == text.size()) break;
        line_start = line_end + 1;
    }
}

void check_formula(std::string_view text, const scan::Span& quote, const CheckContext& ctx,
                   std::vector<PendingDiagnostic>& diags) {
    const size_t begin = quote.begin + 1;
    const size_t end = quote.end - 1;

    // symbol tokens, stray backslashes, and '::'
    for (size_t i = begin; i < end;) {
        char c = text[i];
        if (c == '\\') {
            if (i + 1 < end && text[i + 1] == '<') {
                size_t j = i + 2;
                while (j < end && is_symbol_name_char(text[j])) ++j;
                if (j >= end || text[j] != '>' || j == i + 2) {
                    diags.push_back({i, j, "malformed Isabelle symbol token", Severity::error});
                    i = j;
                    continue;
                }
                std::string name(text.substr(i + 2, j - i - 2));
                if (!ctx.symbols.count(name)) {
                    diags.push_back({i, j + 1, "unknown Isabelle symbol \\<" + name + ">",
                                     ctx.unknown_symbol_is_warning ? Severity::warning
                                                                   : Severity::error});
                }
                i = j + 1;
                continue;
            }
            diags.push_back({i, i + 2, "stray backslash escape in formula", Severity::error});
            i += 2;
            continue;
        }
        if (c == ':' && i + 1 < end && text[i + 1] == ':') {
            diags.push_back({i, i + 2, "'::' type ascription is not Isabelle/ZF syntax",
                             Severity::error});
            i += 2;
            continue;
        }
        ++i;
    }

    // bracket balance within the formula
    std::vector<std::pair<char, size_t>> stack;
    auto closes = [](char open, char close) {
        return (open == '(' && close == ')') || (open == '[' && close == ']') ||
               (open == '{' && close == '}');
    };
    std::vector<std::pair<size_t, size_t>> brace_groups;  // for phrase analysis
    for (size_t i = begin; i < end; ++i) {
        char c = text[i];
        if (c == '(' || c == '[' || c == '{') {
            stack.emplace_back(c, i);
        } else if (c == ')' || c == ']' || c == '}') {
            if (stack.empty() || !closes(stack.back().first, c)) {
                diags.push_back({i, i + 1,
                                 std::string("unmatched '") + c + "' inside formula",
                                 Severity::error});
            } else {
                if (c == '}') brace_groups.emplace_back(stack.back().second, i);
                stack.pop_back();
            }
        }
    }
    for (const auto& [open_char, at] : stack) {
        diags.push_back({at, at + 1, std::string("unclosed '") + open_char + "' inside formula",
                         Severity::error});
    }

    // brace phrases: a group of two or more bare words must be whitelisted
    for (const auto& [open_at, close_at] : brace_groups) {
        std::string_view inner = text.substr(open_at + 1, close_at - open_at - 1);
        bool words_only = !inner.empty();
        for (char c : inner) {
            if (!std::isalpha(static_cast<unsigned char>(c)) && c != ' ' && c != '_' &&
                c != '\'') {
                words_only = false;
                break;
            }
        }
        if (!words_only) continue;
        std::string normalized;
        bool last_space = false;
        size_t word_count = 0;
        for (char c : inner) {
            if (c == ' ') {
                last_space = true;
                continue;
            }
            if (last_space && !normalized.empty()) {
                normalized += ' ';
            }
            if (normalized.empty() || normalized.back() == ' ') ++word_count;
            normalized += c;
            last_space = false;
        }
        if (word_count < 2) continue;
        if (!ctx.phrases.count(normalized)) {
            diags.push_back({open_at, close_at + 1, "unknown mixfix phrase {" + normalized + "}",
                             Severity::error});
        }
    }

    // juxtaposed application: ZF applies functions with f(x) or f`(x), so a
    // bare identifier straight after ')' cannot parse
    for (size_t i = begin; i < end; ++i) {
        if (text[i] != ')') continue;
        size_t j = i + 1;
        bool saw_space = false;
        while (j < end && (text[j] == ' ' || text[j] == '\n' || text[j] == '\t')) {
            saw_space = true;
            ++j;
        }
        if (saw_space && j < end && std::isalpha(static_cast<unsigned char>(text[j]))) {
            diags.push_back({j, 0, "juxtaposed application after ')' is not Isabelle/ZF syntax",
                             Severity::error});
        }
    }
}

}  // namespace

std::vector<SyntaxDiagnostic> offline_validate(std::string_view statement,
                                               const CheckContext& context) {
    std::vector<PendingDiagnostic> pending;
    if (trim(statement).empty()) {
        pending.push_back({0, 0, "empty statement", Severity::error});
    } else {
        auto regions = scan::scan_regions(statement);
        for (const auto& problem : regions.problems) {
            pending.push_back({problem.offset, 0, problem.message, Severity::error});
        }
        auto tokens = top_level_tokens(statement, regions);
        check_header(statement, tokens, pending);
        check_clauses(tokens, pending);
        check_proof_words(tokens, pending);
        // Complete quote spans stay checkable even when a later delimiter is
        // unterminated; prose detection needs reliable line states, so it
        // only runs when all regions closed.
        if (regions.problems.empty()) {
            check_prose_lines(statement, regions, pending);
        }
        for (const auto& quote : regions.quotes) {
            check_formula(statement, quote, context, pending);
        }
    }

    std::sort(pending.begin(), pending.end(), [](const PendingDiagnostic& a,
                                                 const PendingDiagnostic& b) {
        if (a.offset != b.offset) return a.offset < b.offset;
        return a.message < b.message;
    });
    pending.erase(std::unique(pending.begin(), pending.end(),
                              [](const PendingDiagnostic& a, const PendingDiagnostic& b) {
                                  return a.offset == b.offset && a.message == b.message;
                              }),
                  pending.end());

    LineIndex lines(statement);
    std::vector<SyntaxDiagnostic> out;
    out.reserve(pending.size());
    for (const auto& p : pending) {
        SyntaxDiagnostic d;
        d.line = lines.line(p.offset);
        d.offset = lines.column(p.offset);
        d.end_offset = p.end_offset > p.offset && lines.line(p.end_offset - 1) == d.line
                           ? lines.column(p.end_offset - 1) + 1
                           : -1;
        d.message = p.message;
        d.severity = p.severity;
        out.push_back(std::move(d));
    }
    return out;
}

std::string wrap_theory(std::string_view statement, const CheckContext& context) {
    if (context.imports.empty()) {
        throw Error("wrap_theory: imports must not be empty");
    }
    std::string imports;
    for (size_t i = 0; i < context.imports.size(); ++i) {
        if (i) imports += ' ';
        imports += context.imports[i];
    }
    bool opens_goal = statement.rfind("definition", 0) != 0;
    std::string out;
    out += "theory Check\n  imports " + imports + "\nbegin\n\n";
    out += statement;
    out += "\n";
    if (opens_goal) out += "oops\n";
    out += "\nend\n";
    return out;
}

}  // namespace autoform::checker
