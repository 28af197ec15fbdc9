#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "autoform/corpus.hpp"
#include "autoform/util.hpp"

namespace autoform::retrieval {

/// Field selection for knowledge-base documents: T = comment,
/// I = informalization, S = formal statement.
struct IndexMode {
    bool use_comment = true;
    bool use_informalization = false;
    bool use_statement = false;

    bool valid() const { return use_comment || use_informalization || use_statement; }
    std::string label() const;
    /// Accepts "T", "TS", "IS", "TIS" and the "T+S" spellings.
    static IndexMode from_label(std::string_view label);

    bool operator==(const IndexMode&) const = default;
};

struct QueryMode {
    bool augment_with_zero_shot = false;  // append a zero-shot formalization
};

struct MissingZeroShotError : Error {
    using Error::Error;
};

struct EmptyTrainSplitError : Error {
    using Error::Error;
};

struct RetrievalHit {
    std::string item_id;
    double score = 0;
    int rank = 0;

    bool operator==(const RetrievalHit&) const = default;
};

struct Bm25Params {
    double k1 = 1.5;
    double b = 0.75;
};

/// Text a corpus item contributes to the index under a mode: the selected
/// fields joined by single spaces in T, I, S order.
std::string index_document_text(const corpus::CorpusItem& item, IndexMode mode);

/// Query text: the item comment, optionally extended with a zero-shot
/// formalization on a new line.
std::string make_query(const corpus::CorpusItem& item, QueryMode mode,
                       const std::optional<std::string>& zero_shot_result = std::nullopt);

/// Okapi BM25 index over the train split. Tie-breaking is by ascending
/// item id, so rankings are independent of insertion order. Immutable
/// after build and safe to share across threads.
class KnowledgeBaseIndex {
public:
    struct Doc {
        std::string id;
        size_t length = 0;
        std::map<std::string, int> term_frequencies;
    };

    static KnowledgeBaseIndex build(const corpus::Dataset& dataset, IndexMode mode,
                                    Bm25Params params = {});

    std::vector<RetrievalHit> retrieve(std::string_view query_text, size_t k) const;

    /// Robertson/Sparck-Jones idf with +0.5 smoothing, floored at zero.
    double idf(const std::string& term) const;
    double score_document(const Doc& doc, const std::vector<std::string>& query_tokens) const;

    size_t size() const { return docs_.size(); }
    double average_doc_length() const { return avgdl_; }
    const IndexMode& mode() const { return mode_; }
    const Bm25Params& params() const { return params_; }
    const std::vector<Doc>& docs() const { return docs_; }
    int document_frequency(const std::string& term) const;

    std::string to_json() const;
    static KnowledgeBaseIndex from_json(std::string_view text);
    void save(const std::string& path) const;
    static KnowledgeBaseIndex load(const std::string& path);

private:
    std::vector<Doc> docs_;  // sorted by id
    std::map<std::string, int> document_frequencies_;
    Bm25Params params_;
    IndexMode mode_;
    double avgdl_ = 0;

    void finalize();
};

}  // namespace autoform::retrieval
