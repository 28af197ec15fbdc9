#include "autoform/tokenize.hpp"

#include <cctype>

#include "autoform/util.hpp"

namespace autoform {

namespace {

bool is_word_byte(unsigned char c) {
    // Non-ASCII bytes count as word characters so multi-byte code points
    // stay inside one token.
    return std::isalnum(c) || c >= 0x80;
}

bool is_symbol_name_byte(unsigned char c) { return std::isalnum(c) || c == '_' || c == '^'; }

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (c == '\\') {
            if (i + 1 < n && text[i + 1] == '<') {
                // \<name> emitted atomically, including the delimiters.
                size_t j = i + 2;
                while (j < n && is_symbol_name_byte(static_cast<unsigned char>(text[j]))) ++j;
                if (j < n && text[j] == '>') {
                    tokens.push_back(to_lower(text.substr(i, j - i + 1)));
                    i = j + 1;
                    continue;
                }
            } else if (i + 1 < n && std::isalpha(static_cast<unsigned char>(text[i + 1]))) {
                // LaTeX command such as \bigcup.
                size_t j = i + 1;
                while (j < n && std::isalpha(static_cast<unsigned char>(text[j]))) ++j;
                tokens.push_back(to_lower(text.substr(i, j - i)));
                i = j;
                continue;
            }
            ++i;
            continue;
        }
        if (is_word_byte(c)) {
            size_t j = i;
            while (j < n && is_word_byte(static_cast<unsigned char>(text[j]))) ++j;
            tokens.push_back(to_lower(text.substr(i, j - i)));
            i = j;
            continue;
        }
        ++i;
    }
    return tokens;
}

}  // namespace autoform
