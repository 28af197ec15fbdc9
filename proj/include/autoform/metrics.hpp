#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "autoform/checker.hpp"
#include "autoform/util.hpp"

namespace autoform::metrics {

struct EmptyReferenceError : Error {
    using Error::Error;
};

struct InsufficientDataError : Error {
    using Error::Error;
};

/// Sentence-level BLEU over 1- and 2-grams with uniform weights, the
/// standard brevity penalty and an epsilon floor (1e-9) on zero match
/// counts. Orders without reference n-grams are omitted and the weights
/// renormalize, keeping identity at exactly 100 for single-token
/// references. Tokenization is shared with retrieval. Range 0-100.
double bleu2(std::string_view reference, std::string_view candidate);

/// Corpus-level variant: n-gram and length statistics pool across pairs
/// before the score is taken.
class Bleu2Accumulator {
public:
    void add(std::string_view reference, std::string_view candidate);
    double score() const;
    size_t size() const { return pairs_; }

private:
    double matches_[2] = {0, 0};
    double totals_[2] = {0, 0};
    double reference_totals_[2] = {0, 0};
    double candidate_len_ = 0;
    double reference_len_ = 0;
    size_t pairs_ = 0;
};

/// Character n-gram F-beta (n = 1..6, beta = 3) with whitespace removed
/// before extraction. F-scores average over orders where either side has
/// n-grams. Range 0-100.
double chrf(std::string_view reference, std::string_view candidate);

/// Edit-distance similarity: 100 * (1 - lev / max(|ref|, |cand|)) over code
/// points with unit costs. Both-empty scores 100 by convention.
double ruby(std::string_view reference, std::string_view candidate);

/// Unit-cost Levenshtein distance over code points.
size_t levenshtein(const std::vector<char32_t>& a, const std::vector<char32_t>& b);

/// Per-token embedding contract for the embedding-based score.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    /// One fixed-dimension vector per input token.
    virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& tokens) = 0;
    virtual std::string name() const = 0;
};

/// Deterministic hash-seeded embedder for tests and offline runs.
class HashEmbedder final : public EmbeddingProvider {
public:
    explicit HashEmbedder(size_t dim = 16, uint64_t seed = 1) : dim_(dim), seed_(seed) {}
    std::vector<std::vector<double>> embed(const std::vector<std::string>& tokens) override;
    std::string name() const override { return "hash"; }

private:
    size_t dim_;
    uint64_t seed_;
};

/// Greedy cosine-matching F1 over token embeddings, scaled to 0-100.
/// Precision matches each candidate token to its best reference token,
/// recall the reverse; the score is the F1 of the two means.
double cbs(EmbeddingProvider& provider, std::string_view reference, std::string_view candidate);

/// 100 * (items with zero error diagnostics) / items.
double pass_rate(const std::vector<std::vector<checker::SyntaxDiagnostic>>& per_item);
double pass_rate_from_flags(const std::vector<bool>& passed);

struct MetricVector {
    double bleu2 = 0;
    double chrf = 0;
    double ruby = 0;
    std::optional<double> cbs;
    bool pass = false;

    bool operator==(const MetricVector&) const = default;
};

struct CorrelationMatrix {
    std::vector<std::string> names;
    /// entries[i][j] is absent when either column has zero variance.
    /// The diagonal is exactly 1.
    std::vector<std::vector<std::optional<double>>> entries;
};

/// Pearson product-moment correlations across metric columns. Columns must
/// share a length of at least two rows.
CorrelationMatrix pearson_matrix(const std::vector<std::string>& names,
                                 const std::vector<std::vector<double>>& columns);

}  // namespace autoform::metrics
