#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "autoform/util.hpp"

namespace autoform::llm {
class Provider;
}

namespace autoform::corpus {

enum class ItemKind { lemma, theorem, corollary, definition };

std::string_view kind_name(ItemKind kind);
std::optional<ItemKind> kind_from_name(std::string_view name);

enum class Split { train, test, unassigned };

std::string_view split_name(Split split);
std::optional<Split> split_from_name(std::string_view name);

struct CorpusItem {
    std::string id;
    ItemKind kind = ItemKind::lemma;
    std::optional<std::string> locale;
    std::string name;
    std::string formal_statement;
    std::string comment;
    std::optional<std::string> proof;
    std::optional<std::string> informalization;
    std::string source_file;
    Split split = Split::unassigned;

    bool operator==(const CorpusItem&) const = default;
};

struct Rational {
    int64_t num = 9;
    int64_t den = 10;
};

/// Parses "0.9" or "9/10" into a rational train fraction.
Rational parse_ratio(std::string_view text);

struct Dataset {
    std::vector<CorpusItem> items;
    uint64_t split_seed = 0;
    Rational split_ratio;

    std::vector<const CorpusItem*> train() const;
    std::vector<const CorpusItem*> test() const;
    const CorpusItem* find(std::string_view id) const;
};

struct MalformedTheoryError : Error {
    MalformedTheoryError(const std::string& message, int line)
        : Error(message), line(line) {}
    int line;
};

struct EmptyCorpusError : Error {
    using Error::Error;
};

struct SchemaError : Error {
    using Error::Error;
};

struct ParsedTheory {
    std::vector<CorpusItem> items;
    /// One note per item that had no attachable text block or comment.
    std::vector<std::string> warnings;
};

/// Extracts lemma/theorem/corollary/definition items from theory-file
/// source. Comments attach from the closest preceding text block or (* *)
/// comment with no other item in between. Statements end before the first
/// top-level proof keyword; quoted and cartouche regions are opaque.
ParsedTheory parse_theory_file(std::string_view text, std::string_view file_name);

/// Deterministic seeded split. The train count is ratio * n rounded to the
/// nearest integer, assigned over a seeded shuffle of item positions.
Dataset build_dataset(std::vector<CorpusItem> items, Rational split_ratio, uint64_t seed);

struct InformalizeReport {
    size_t populated = 0;
    size_t skipped = 0;
    std::vector<std::pair<std::string, std::string>> failures;  // id, error
};

/// Fills CorpusItem::informalization through the completion provider.
/// Existing values are kept unless force is set. Provider failures leave
/// the item unpopulated and the run continues.
InformalizeReport informalize_corpus(Dataset& dataset, llm::Provider& provider,
                                     bool force = false);

/// JSONL round trip: a header line with dataset fields, then one item per
/// line. save(load(path)) is byte-identical.
void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(const std::string& path);

std::string dataset_to_jsonl(const Dataset& dataset);
Dataset dataset_from_jsonl(std::string_view text);

}  // namespace autoform::corpus
