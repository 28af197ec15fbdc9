#include "autoform/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "autoform/tokenize.hpp"

namespace autoform::retrieval {

using nlohmann::json;

std::string IndexMode::label() const {
    std::string out;
    auto add = [&out](const char* part) {
        if (!out.empty()) out += '+';
        out += part;
    };
    if (use_comment) add("T");
    if (use_informalization) add("I");
    if (use_statement) add("S");
    return out;
}

IndexMode IndexMode::from_label(std::string_view label) {
    IndexMode mode{false, false, false};
    for (char c : label) {
        switch (c) {
            case 'T': case 't': mode.use_comment = true; break;
            case 'I': case 'i': mode.use_informalization = true; break;
            case 'S': case 's': mode.use_statement = true; break;
            case '+': case ' ': break;
            default: throw Error("unknown index mode: " + std::string(label));
        }
    }
    if (!mode.valid()) throw Error("index mode selects no fields: " + std::string(label));
    return mode;
}

std::string index_document_text(const corpus::CorpusItem& item, IndexMode mode) {
    std::string out;
    auto add = [&out](std::string_view part) {
        if (!out.empty()) out += ' ';
        out += part;
    };
    if (mode.use_comment) add(item.comment);
    if (mode.use_informalization) add(item.informalization ? *item.informalization : "");
    if (mode.use_statement) add(item.formal_statement);
    return out;
}

std::string make_query(const corpus::CorpusItem& item, QueryMode mode,
                       const std::optional<std::string>& zero_shot_result) {
    if (mode.augment_with_zero_shot) {
        if (!zero_shot_result) {
            throw MissingZeroShotError("query mode T+ZS needs a zero-shot formalization");
        }
        return item.comment + "\n" + *zero_shot_result;
    }
    if (zero_shot_result) {
        throw Error("zero-shot text supplied but the query mode does not use it");
    }
    return item.comment;
}

void KnowledgeBaseIndex::finalize() {
    std::sort(docs_.begin(), docs_.end(),
              [](const Doc& a, const Doc& b) { return a.id < b.id; });
    document_frequencies_.clear();
    double total_length = 0;
    for (const auto& doc : docs_) {
        total_length += static_cast<double>(doc.length);
        for (const auto& [term, count] : doc.term_frequencies) {
            (void)count;
            document_frequencies_[term] += 1;
        }
    }
    avgdl_ = docs_.empty() ? 0.0 : total_length / static_cast<double>(docs_.size());
}

KnowledgeBaseIndex KnowledgeBaseIndex::build(const corpus::Dataset& dataset, IndexMode mode,
                                             Bm25Params params) {
    if (!mode.valid()) throw Error("index mode selects no fields");
    KnowledgeBaseIndex index;
    index.mode_ = mode;
    index.params_ = params;
    for (const auto* item : dataset.train()) {
        Doc doc;
        doc.id = item->id;
        auto tokens = tokenize(index_document_text(*item, mode));
        doc.length = tokens.size();
        for (const auto& token : tokens) doc.term_frequencies[token] += 1;
        index.docs_.push_back(std::move(doc));
    }
    if (index.docs_.empty()) {
        throw EmptyTrainSplitError("index build needs a non-empty train split");
    }
    index.finalize();
    return index;
}

double KnowledgeBaseIndex::idf(const std::string& term) const {
    auto it = document_frequencies_.find(term);
    double df = it == document_frequencies_.end() ? 0.0 : static_cast<double>(it->second);
    double n = static_cast<double>(docs_.size());
    double raw = std::log((n - df + 0.5) / (df + 0.5));
    return std::max(0.0, raw);
}

int KnowledgeBaseIndex::document_frequency(const std::string& term) const {
    auto it = document_frequencies_.find(term);
    return it == document_frequencies_.end() ? 0 : it->second;
}

double KnowledgeBaseIndex::score_document(const Doc& doc,
                                          const std::vector<std::string>& query_tokens) const {
    double score = 0;
    const double k1 = params_.k1;
    const double b = params_.b;
    for (const auto& term : query_tokens) {
        auto it = doc.term_frequencies.find(term);
        if (it == doc.term_frequencies.end()) continue;
        double tf = static_cast<double>(it->second);
        double norm = avgdl_ > 0 ? static_cast<double>(doc.length) / avgdl_ : 0.0;
        double denom = tf + k1 * (1.0 - b + b * norm);
        score += idf(term) * (tf * (k1 + 1.0)) / denom;
    }
    return score;
}

std::vector<RetrievalHit> KnowledgeBaseIndex::retrieve(std::string_view query_text,
                                                       size_t k) const {
    auto query_tokens = tokenize(query_text);
    std::vector<RetrievalHit> hits;
    hits.reserve(docs_.size());
    for (const auto& doc : docs_) {
        hits.push_back({doc.id, score_document(doc, query_tokens), 0});
    }
    std::sort(hits.begin(), hits.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.item_id < b.item_id;
    });
    if (hits.size() > k) hits.resize(k);
    for (size_t i = 0; i < hits.size(); ++i) hits[i].rank = static_cast<int>(i) + 1;
    return hits;
}

std::string KnowledgeBaseIndex::to_json() const {
    json j;
    j["schema"] = "autoform.index/1";
    j["mode"] = {{"T", mode_.use_comment},
                 {"I", mode_.use_informalization},
                 {"S", mode_.use_statement}};
    j["params"] = {{"k1", params_.k1}, {"b", params_.b}};
    json docs = json::array();
    for (const auto& doc : docs_) {
        json d;
        d["id"] = doc.id;
        d["len"] = doc.length;
        d["tf"] = doc.term_frequencies;
        docs.push_back(std::move(d));
    }
    j["docs"] = std::move(docs);
    return j.dump();
}

KnowledgeBaseIndex KnowledgeBaseIndex::from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("index file is not valid JSON: ") + e.what());
    }
    if (!j.contains("schema") || j["schema"] != "autoform.index/1") {
        throw Error("unsupported index schema");
    }
    KnowledgeBaseIndex index;
    index.mode_.use_comment = j["mode"].value("T", false);
    index.mode_.use_informalization = j["mode"].value("I", false);
    index.mode_.use_statement = j["mode"].value("S", false);
    index.params_.k1 = j["params"].value("k1", 1.5);
    index.params_.b = j["params"].value("b", 0.75);
    for (const auto& d : j["docs"]) {
        Doc doc;
        doc.id = d["id"].get<std::string>();
        doc.length = d["len"].get<size_t>();
        for (const auto& [term, count] : d["tf"].items()) {
            doc.term_frequencies[term] = count.get<int>();
        }
        index.docs_.push_back(std::move(doc));
    }
    index.finalize();
    return index;
}

void KnowledgeBaseIndex::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path);
    out << to_json() << '\n';
}

KnowledgeBaseIndex KnowledgeBaseIndex::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_json(buffer.str());
}

}  // namespace autoform::retrieval
