#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace autoform::scan {

struct Span {
    size_t begin = 0;  // byte offset of the opening delimiter
    size_t end = 0;    // one past the closing delimiter

    bool contains(size_t offset) const { return offset >= begin && offset < end; }
};

struct Word {
    size_t begin = 0;
    size_t end = 0;
    std::string_view text;
};

struct Punct {
    size_t offset = 0;
    char ch = 0;
};

struct Problem {
    size_t offset = 0;
    std::string message;
};

/// Region decomposition of Isabelle outer syntax: quoted formulas,
/// (* *) comments (nested), \<open>...\<close> cartouches (nested).
/// Words and punctuation are reported only outside all regions.
struct ScanResult {
    std::vector<Span> quotes;
    std::vector<Span> comments;
    std::vector<Span> cartouches;
    std::vector<Word> words;
    std::vector<Punct> punct;
    std::vector<Problem> problems;  // unterminated or stray delimiters

    /// True when the offset lies outside every region span.
    bool neutral_at(size_t offset) const;
};

ScanResult scan_regions(std::string_view text);

/// Content of a span with its delimiters stripped (quote: 1 byte each side,
/// comment: 2, cartouche: 7/8).
std::string_view span_content(std::string_view text, const Span& span, size_t open_len,
                              size_t close_len);

}  // namespace autoform::scan
