#include "autoform/scan.hpp"

#include <cctype>

namespace autoform::scan {

namespace {

bool is_word_char(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '_' || c == '\'';
}

bool matches(std::string_view text, size_t i, std::string_view token) {
    return text.substr(i, token.size()) == token;
}

}  // namespace

bool ScanResult::neutral_at(size_t offset) const {
    for (const auto* spans : {&quotes, &comments, &cartouches}) {
        for (const auto& span : *spans) {
            if (span.contains(offset)) return false;
            if (span.begin > offset) break;
        }
    }
    return true;
}

std::string_view span_content(std::string_view text, const Span& span, size_t open_len,
                              size_t close_len) {
    size_t begin = span.begin + open_len;
    size_t end = span.end >= close_len ? span.end - close_len : begin;
    if (end < begin) end = begin;
    return text.substr(begin, end - begin);
}

ScanResult scan_regions(std::string_view text) {
    ScanResult result;
    const size_t n = text.size();
    size_t i = 0;
    bool in_quote = false;
    size_t quote_start = 0;
    int comment_depth = 0;
    size_t comment_start = 0;
    int cartouche_depth = 0;
    size_t cartouche_start = 0;

    while (i < n) {
        if (in_quote) {
            if (text[i] == '\\' && i + 1 < n && text[i + 1] == '"') {
                i += 2;
                continue;
            }
            if (text[i] == '"') {
                result.quotes.push_back({quote_start, i + 1});
                in_quote = false;
            }
            ++i;
            continue;
        }
        if (comment_depth > 0) {
            if (matches(text, i, "(*")) {
                ++comment_depth;
                i += 2;
            } else if (matches(text, i, "*)")) {
                if (--comment_depth == 0) result.comments.push_back({comment_start, i + 2});
                i += 2;
            } else {
                ++i;
            }
            continue;
        }
        if (cartouche_depth > 0) {
            if (matches(text, i, "\\<open>")) {
                ++cartouche_depth;
                i += 7;
            } else if (matches(text, i, "\\<close>")) {
                if (--cartouche_depth == 0) result.cartouches.push_back({cartouche_start, i + 8});
                i += 8;
            } else {
                ++i;
            }
            continue;
        }
        char c = text[i];
        if (c == '"') {
            in_quote = true;
            quote_start = i;
            ++i;
            continue;
        }
        if (matches(text, i, "(*")) {
            comment_depth = 1;
            comment_start = i;
            i += 2;
            continue;
        }
        if (matches(text, i, "\\<open>")) {
            cartouche_depth = 1;
            cartouche_start = i;
            i += 7;
            continue;
        }
        if (matches(text, i, "*)")) {
            result.problems.push_back({i, "comment close without a matching open"});
            i += 2;
            continue;
        }
        if (matches(text, i, "\\<close>")) {
            result.problems.push_back({i, "cartouche close without a matching open"});
            i += 8;
            continue;
        }
        if (is_word_char(c)) {
            size_t begin = i;
            while (i < n && is_word_char(text[i])) ++i;
            result.words.push_back({begin, i, text.substr(begin, i - begin)});
            continue;
        }
        if (!std::isspace(static_cast<unsigned char>(c))) {
            result.punct.push_back({i, c});
        }
        ++i;
    }

    if (in_quote) result.problems.push_back({quote_start, "unterminated quoted formula"});
    if (comment_depth > 0) result.problems.push_back({comment_start, "unterminated comment"});
    if (cartouche_depth > 0) result.problems.push_back({cartouche_start, "unterminated cartouche"});
    return result;
}

}  // namespace autoform::scan
