#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace autoform {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

/// Splits into lines without terminators. "a\nb\n" -> {"a","b"}, "" -> {}.
std::vector<std::string_view> split_lines(std::string_view text);

uint64_t fnv1a64(std::string_view data);
std::string hex64(uint64_t v);

/// Decodes UTF-8 into code points. Invalid bytes decode to U+FFFD.
std::vector<char32_t> utf8_decode(std::string_view s);

/// Maps byte offsets to 1-based lines and 0-based byte columns.
class LineIndex {
public:
    explicit LineIndex(std::string_view text);
    int line(size_t offset) const;
    int column(size_t offset) const;
    /// Byte offset of the start of a 1-based line plus a 0-based column.
    size_t offset_of(int line, int column) const;

private:
    std::vector<size_t> line_starts_;
};

/// Small deterministic PRNG for noise generation and test data.
struct SplitMix64 {
    uint64_t state = 0;

    explicit SplitMix64(uint64_t seed) : state(seed) {}

    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0,1).
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in [0, n).
    uint64_t next_below(uint64_t n) { return n == 0 ? 0 : next() % n; }
};

}  // namespace autoform
