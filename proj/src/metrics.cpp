#include "autoform/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "autoform/tokenize.hpp"

namespace autoform::metrics {

namespace {

constexpr double kBleuEpsilon = 1e-9;
constexpr double kChrfBeta = 3.0;
constexpr int kChrfMaxOrder = 6;

struct NgramStats {
    double matches = 0;
    double total = 0;
};

NgramStats ngram_stats(const std::vector<std::string>& ref, const std::vector<std::string>& cand,
                       size_t n) {
    NgramStats stats;
    if (cand.size() < n) return stats;
    std::map<std::vector<std::string>, int> ref_counts;
    for (size_t i = 0; i + n <= ref.size(); ++i) {
        ref_counts[{ref.begin() + static_cast<long>(i), ref.begin() + static_cast<long>(i + n)}]++;
    }
    std::map<std::vector<std::string>, int> cand_counts;
    for (size_t i = 0; i + n <= cand.size(); ++i) {
        cand_counts[{cand.begin() + static_cast<long>(i),
                     cand.begin() + static_cast<long>(i + n)}]++;
    }
    for (const auto& [gram, count] : cand_counts) {
        stats.total += count;
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) stats.matches += std::min(count, it->second);
    }
    return stats;
}

// Orders with no reference n-grams drop out and the uniform weights
// renormalize over the rest, so identical strings always score 100.
double bleu_from_counts(const double matches[2], const double totals[2],
                        const double reference_totals[2], double candidate_len,
                        double reference_len) {
    if (candidate_len == 0) return 0.0;
    int orders = 0;
    for (int n = 0; n < 2; ++n) {
        if (reference_totals[n] > 0) ++orders;
    }
    if (orders == 0) return 0.0;
    double log_sum = 0;
    for (int n = 0; n < 2; ++n) {
        if (reference_totals[n] <= 0) continue;
        double p;
        if (totals[n] > 0) {
            p = matches[n] > 0 ? matches[n] / totals[n] : kBleuEpsilon / totals[n];
        } else {
            p = kBleuEpsilon;
        }
        log_sum += std::log(p) / orders;
    }
    double bp = candidate_len >= reference_len ? 1.0 : std::exp(1.0 - reference_len / candidate_len);
    return 100.0 * bp * std::exp(log_sum);
}

std::u32string strip_whitespace(std::string_view text) {
    std::u32string out;
    for (char32_t cp : utf8_decode(text)) {
        if (cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'\f' || cp == U'\v')
            continue;
        out.push_back(cp);
    }
    return out;
}

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    if (a == b) return 1.0;
    double dot = 0, na = 0, nb = 0;
    for (size_t i = 0; i < a.size() && i < b.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0 || nb == 0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

double bleu2(std::string_view reference, std::string_view candidate) {
    auto ref = tokenize(reference);
    auto cand = tokenize(candidate);
    if (ref.empty()) throw EmptyReferenceError("bleu2: empty reference");
    double matches[2], totals[2], reference_totals[2];
    for (size_t n = 1; n <= 2; ++n) {
        auto stats = ngram_stats(ref, cand, n);
        matches[n - 1] = stats.matches;
        totals[n - 1] = stats.total;
        reference_totals[n - 1] =
            ref.size() >= n ? static_cast<double>(ref.size() - n + 1) : 0.0;
    }
    return bleu_from_counts(matches, totals, reference_totals,
                            static_cast<double>(cand.size()),
                            static_cast<double>(ref.size()));
}

void Bleu2Accumulator::add(std::string_view reference, std::string_view candidate) {
    auto ref = tokenize(reference);
    auto cand = tokenize(candidate);
    if (ref.empty()) throw EmptyReferenceError("bleu2: empty reference");
    for (size_t n = 1; n <= 2; ++n) {
        auto stats = ngram_stats(ref, cand, n);
        matches_[n - 1] += stats.matches;
        totals_[n - 1] += stats.total;
        if (ref.size() >= n) reference_totals_[n - 1] += static_cast<double>(ref.size() - n + 1);
    }
    candidate_len_ += static_cast<double>(cand.size());
    reference_len_ += static_cast<double>(ref.size());
    ++pairs_;
}

double Bleu2Accumulator::score() const {
    return bleu_from_counts(matches_, totals_, reference_totals_, candidate_len_,
                            reference_len_);
}

double chrf(std::string_view reference, std::string_view candidate) {
    std::u32string ref = strip_whitespace(reference);
    std::u32string cand = strip_whitespace(candidate);
    if (ref.empty()) throw EmptyReferenceError("chrf: empty reference");
    double f_sum = 0;
    int orders = 0;
    for (int n = 1; n <= kChrfMaxOrder; ++n) {
        size_t un = static_cast<size_t>(n);
        bool ref_has = ref.size() >= un;
        bool cand_has = cand.size() >= un;
        if (!ref_has && !cand_has) continue;
        ++orders;
        if (!ref_has || !cand_has) continue;  // F contribution is zero
        std::map<std::u32string, int> ref_counts;
        for (size_t i = 0; i + un <= ref.size(); ++i) ref_counts[ref.substr(i, un)]++;
        std::map<std::u32string, int> cand_counts;
        for (size_t i = 0; i + un <= cand.size(); ++i) cand_counts[cand.substr(i, un)]++;
        double matches = 0;
        for (const auto& [gram, count] : cand_counts) {
            auto it = ref_counts.find(gram);
            if (it != ref_counts.end()) matches += std::min(count, it->second);
        }
        if (matches == 0) continue;
        double precision = matches / static_cast<double>(cand.size() - un + 1);
        double recall = matches / static_cast<double>(ref.size() - un + 1);
        double beta2 = kChrfBeta * kChrfBeta;
        f_sum += (1.0 + beta2) * precision * recall / (beta2 * precision + recall);
    }
    if (orders == 0) return 0.0;
    return 100.0 * f_sum / orders;
}

size_t levenshtein(const std::vector<char32_t>& a, const std::vector<char32_t>& b) {
    const size_t m = a.size();
    const size_t n = b.size();
    if (m == 0) return n;
    if (n == 0) return m;
    std::vector<size_t> prev(n + 1), cur(n + 1);
    for (size_t j = 0; j <= n; ++j) prev[j] = j;
    for (size_t i = 1; i <= m; ++i) {
        cur[0] = i;
        for (size_t j = 1; j <= n; ++j) {
            size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[n];
}

double ruby(std::string_view reference, std::string_view candidate) {
    auto ref = utf8_decode(reference);
    auto cand = utf8_decode(candidate);
    if (ref.empty() && cand.empty()) return 100.0;
    size_t dist = levenshtein(ref, cand);
    double longest = static_cast<double>(std::max(ref.size(), cand.size()));
    return 100.0 * (1.0 - static_cast<double>(dist) / longest);
}

std::vector<std::vector<double>> HashEmbedder::embed(const std::vector<std::string>& tokens) {
    std::vector<std::vector<double>> out;
    out.reserve(tokens.size());
    for (const auto& token : tokens) {
        SplitMix64 rng(fnv1a64(token) ^ seed_);
        std::vector<double> v(dim_);
        double norm = 0;
        for (size_t i = 0; i < dim_; ++i) {
            v[i] = rng.next_unit() * 2.0 - 1.0;
            norm += v[i] * v[i];
        }
        norm = std::sqrt(norm);
        if (norm > 0) {
            for (auto& x : v) x /= norm;
        }
        out.push_back(std::move(v));
    }
    return out;
}

double cbs(EmbeddingProvider& provider, std::string_view reference, std::string_view candidate) {
    auto ref_tokens = tokenize(reference);
    auto cand_tokens = tokenize(candidate);
    if (ref_tokens.empty() && cand_tokens.empty()) return 100.0;
    if (ref_tokens.empty() || cand_tokens.empty()) return 0.0;
    auto ref_vecs = provider.embed(ref_tokens);
    auto cand_vecs = provider.embed(cand_tokens);
    auto best_against = [](const std::vector<std::vector<double>>& from,
                           const std::vector<std::vector<double>>& against) {
        double sum = 0;
        for (const auto& v : from) {
            double best = -1.0;
            for (const auto& w : against) best = std::max(best, cosine(v, w));
            sum += std::max(0.0, best);
        }
        return sum / static_cast<double>(from.size());
    };
    double precision = clamp01(best_against(cand_vecs, ref_vecs));
    double recall = clamp01(best_against(ref_vecs, cand_vecs));
    if (precision + recall == 0) return 0.0;
    return 100.0 * (2.0 * precision * recall) / (precision + recall);
}

double pass_rate(const std::vector<std::vector<checker::SyntaxDiagnostic>>& per_item) {
    if (per_item.empty()) throw InsufficientDataError("pass_rate: no items");
    size_t clean = 0;
    for (const auto& diagnostics : per_item) {
        if (checker::passes(diagnostics)) ++clean;
    }
    return 100.0 * static_cast<double>(clean) / static_cast<double>(per_item.size());
}

double pass_rate_from_flags(const std::vector<bool>& passed) {
    if (passed.empty()) throw InsufficientDataError("pass_rate: no items");
    size_t clean = static_cast<size_t>(std::count(passed.begin(), passed.end(), true));
    return 100.0 * static_cast<double>(clean) / static_cast<double>(passed.size());
}

CorrelationMatrix pearson_matrix(const std::vector<std::string>& names,
                                 const std::vector<std::vector<double>>& columns) {
    if (names.size() != columns.size()) {
        throw InsufficientDataError("pearson_matrix: names/columns size mismatch");
    }
    if (columns.empty() || columns.front().size() < 2) {
        throw InsufficientDataError("pearson_matrix: need at least two rows");
    }
    const size_t rows = columns.front().size();
    for (const auto& col : columns) {
        if (col.size() != rows) throw InsufficientDataError("pearson_matrix: ragged columns");
    }
    const size_t k = columns.size();
    std::vector<double> mean(k, 0), ssd(k, 0);
    for (size_t i = 0; i < k; ++i) {
        for (double v : columns[i]) mean[i] += v;
        mean[i] /= static_cast<double>(rows);
        for (double v : columns[i]) ssd[i] += (v - mean[i]) * (v - mean[i]);
    }
    CorrelationMatrix out;
    out.names = names;
    out.entries.assign(k, std::vector<std::optional<double>>(k));
    for (size_t i = 0; i < k; ++i) {
        for (size_t j = 0; j < k; ++j) {
            if (i == j) {
                out.entries[i][j] = 1.0;
                continue;
            }
            if (ssd[i] == 0 || ssd[j] == 0) continue;  // undefined, reported absent
            double cov = 0;
            for (size_t r = 0; r < rows; ++r) {
                cov += (columns[i][r] - mean[i]) * (columns[j][r] - mean[j]);
            }
            double r = cov / std::sqrt(ssd[i] * ssd[j]);
            out.entries[i][j] = std::min(1.0, std::max(-1.0, r));
        }
    }
    return out;
}

}  // namespace autoform::metrics
