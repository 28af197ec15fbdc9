#include "autoform/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "autoform/llm.hpp"
#include "autoform/prompts.hpp"
#include "autoform/scan.hpp"

namespace autoform::corpus {

using nlohmann::json;

std::string_view kind_name(ItemKind kind) {
    switch (kind) {
        case ItemKind::lemma: return "lemma";
        case ItemKind::theorem: return "theorem";
        case ItemKind::corollary: return "corollary";
        case ItemKind::definition: return "definition";
    }
    return "lemma";
}

std::optional<ItemKind> kind_from_name(std::string_view name) {
    if (name == "lemma") return ItemKind::lemma;
    if (name == "theorem") return ItemKind::theorem;
    if (name == "corollary") return ItemKind::corollary;
    if (name == "definition") return ItemKind::definition;
    return std::nullopt;
}

std::string_view split_name(Split split) {
    switch (split) {
        case Split::train: return "train";
        case Split::test: return "test";
        case Split::unassigned: return "unassigned";
    }
    return "unassigned";
}

std::optional<Split> split_from_name(std::string_view name) {
    if (name == "train") return Split::train;
    if (name == "test") return Split::test;
    if (name == "unassigned") return Split::unassigned;
    return std::nullopt;
}

Rational parse_ratio(std::string_view text) {
    std::string s(trim(text));
    Rational r;
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        r.num = std::stoll(s.substr(0, slash));
        r.den = std::stoll(s.substr(slash + 1));
    } else {
        auto dot = s.find('.');
        if (dot == std::string::npos) {
            r.num = std::stoll(s);
            r.den = 1;
        } else {
            std::string digits = s.substr(0, dot) + s.substr(dot + 1);
            size_t places = s.size() - dot - 1;
            r.num = std::stoll(digits);
            r.den = 1;
            for (size_t i = 0; i < places; ++i) r.den *= 10;
        }
    }
    if (r.den <= 0 || r.num <= 0 || r.num >= r.den) {
        throw Error("split ratio must lie strictly between 0 and 1: " + s);
    }
    return r;
}

std::vector<const CorpusItem*> Dataset::train() const {
    std::vector<const CorpusItem*> out;
    for (const auto& item : items) {
        if (item.split == Split::train) out.push_back(&item);
    }
    return out;
}

std::vector<const CorpusItem*> Dataset::test() const {
    std::vector<const CorpusItem*> out;
    for (const auto& item : items) {
        if (item.split == Split::test) out.push_back(&item);
    }
    return out;
}

const CorpusItem* Dataset::find(std::string_view id) const {
    for (const auto& item : items) {
        if (item.id == id) return &item;
    }
    return nullptr;
}

namespace {

bool is_proof_keyword(std::string_view w) {
    return w == "proof" || w == "by" || w == "using" || w == "apply" || w == "unfolding";
}

bool is_structural_keyword(std::string_view w) {
    static const std::set<std::string_view> keywords = {
        "lemma",    "theorem",       "corollary", "definition",    "text",
        "section",  "subsection",    "subsubsection", "paragraph", "chapter",
        "locale",   "sublocale",     "abbreviation",  "lemmas",    "theorems",
        "notation", "axiomatization", "consts",       "instantiation", "fun",
        "primrec",  "end",           "theory"};
    return keywords.count(w) > 0;
}

struct Event {
    enum class Kind { word, quote, comment, cartouche, punct };
    Kind kind;
    size_t begin;
    size_t end;
    std::string_view word;  // for word events
    char punct = 0;         // for punct events
};

std::vector<Event> build_events(const scan::ScanResult& regions) {
    std::vector<Event> events;
    for (const auto& w : regions.words) {
        events.push_back({Event::Kind::word, w.begin, w.end, w.text, 0});
    }
    for (const auto& q : regions.quotes) {
        events.push_back({Event::Kind::quote, q.begin, q.end, {}, 0});
    }
    for (const auto& c : regions.comments) {
        events.push_back({Event::Kind::comment, c.begin, c.end, {}, 0});
    }
    for (const auto& c : regions.cartouches) {
        events.push_back({Event::Kind::cartouche, c.begin, c.end, {}, 0});
    }
    for (const auto& p : regions.punct) {
        events.push_back({Event::Kind::punct, p.offset, p.offset + 1, {}, p.ch});
    }
    std::sort(events.begin(), events.end(),
              [](const Event& a, const Event& b) { return a.begin < b.begin; });
    return events;
}

std::string rtrim_copy(std::string_view s) {
    size_t e = s.size();
    while (e > 0 && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(0, e));
}

std::string file_stem(std::string_view file_name) {
    return std::filesystem::path(std::string(file_name)).stem().string();
}

}  // namespace

ParsedTheory parse_theory_file(std::string_view text, std::string_view file_name) {
    auto regions = scan::scan_regions(text);
    if (!regions.problems.empty()) {
        LineIndex lines(text);
        const auto& p = regions.problems.front();
        int line = lines.line(p.offset);
        throw MalformedTheoryError(
            std::string(file_name) + ": " + p.message + " at line " + std::to_string(line), line);
    }

    const auto events = build_events(regions);
    const std::string stem = file_stem(file_name);

    ParsedTheory out;
    std::optional<std::string> pending_comment;
    std::set<std::string> used_ids;
    int ordinal = 0;

    auto consume_comment_event = [&](const Event& e) {
        if (e.kind == Event::Kind::comment) {
            pending_comment = trim(scan::span_content(text, {e.begin, e.end}, 2, 2));
            return true;
        }
        return false;
    };

    size_t i = 0;
    while (i < events.size()) {
        const Event& e = events[i];
        if (consume_comment_event(e)) {
            ++i;
            continue;
        }
        if (e.kind != Event::Kind::word) {
            ++i;
            continue;
        }
        if (e.word == "text") {
            if (i + 1 < events.size() && events[i + 1].kind == Event::Kind::cartouche) {
                pending_comment =
                    trim(scan::span_content(text, {events[i + 1].begin, events[i + 1].end}, 7, 8));
                i += 2;
                continue;
            }
            ++i;
            continue;
        }
        auto kind = kind_from_name(e.word);
        if (!kind) {
            ++i;
            continue;
        }

        // Item header
        ++ordinal;
        CorpusItem item;
        item.kind = *kind;
        item.source_file = std::string(file_name);
        size_t j = i + 1;
        if (j + 3 < events.size() && events[j].kind == Event::Kind::punct &&
            events[j].punct == '(' && events[j + 1].kind == Event::Kind::word &&
            events[j + 1].word == "in" && events[j + 2].kind == Event::Kind::word &&
            events[j + 3].kind == Event::Kind::punct && events[j + 3].punct == ')') {
            item.locale = std::string(events[j + 2].word);
            j += 4;
        }
        if (j < events.size() && events[j].kind == Event::Kind::word &&
            !is_structural_keyword(events[j].word) && !is_proof_keyword(events[j].word)) {
            item.name = std::string(events[j].word);
        }

        // Statement extent: up to the first top-level proof keyword or the
        // next structural command. Comments are invisible to structure.
        size_t stmt_end = text.size();
        size_t k = j;
        bool has_proof = false;
        while (k < events.size()) {
            const Event& ev = events[k];
            if (ev.kind == Event::Kind::word) {
                if (is_proof_keyword(ev.word)) {
                    stmt_end = ev.begin;
                    has_proof = true;
                    break;
                }
                if (is_structural_keyword(ev.word)) {
                    stmt_end = ev.begin;
                    break;
                }
            }
            ++k;
        }
        item.formal_statement = rtrim_copy(text.substr(e.begin, stmt_end - e.begin));

        size_t next_i = k;
        if (has_proof) {
            size_t proof_begin = stmt_end;
            size_t proof_end = text.size();
            size_t m = k + 1;
            while (m < events.size()) {
                const Event& ev = events[m];
                if (ev.kind == Event::Kind::word && is_structural_keyword(ev.word)) {
                    proof_end = ev.begin;
                    break;
                }
                if (consume_comment_event(ev)) {
                    // a trailing comment may belong to the next item
                }
                ++m;
            }
            item.proof = trim(text.substr(proof_begin, proof_end - proof_begin));
            next_i = m;
        }

        std::string base_id =
            stem + ":" + (item.name.empty() ? "item" + std::to_string(ordinal) : item.name);
        std::string id = base_id;
        int suffix = 2;
        while (used_ids.count(id)) id = base_id + "#" + std::to_string(suffix++);
        used_ids.insert(id);
        item.id = id;

        if (pending_comment) {
            item.comment = *pending_comment;
            pending_comment.reset();
        } else {
            item.comment = "";
            out.warnings.push_back(id + ": no text block or comment attaches to this item");
        }

        out.items.push_back(std::move(item));
        i = next_i;
    }
    return out;
}

Dataset build_dataset(std::vector<CorpusItem> items, Rational split_ratio, uint64_t seed) {
    if (items.empty()) throw EmptyCorpusError("build_dataset: empty corpus");
    if (split_ratio.num <= 0 || split_ratio.den <= 0 || split_ratio.num >= split_ratio.den) {
        throw Error("build_dataset: split ratio must lie strictly between 0 and 1");
    }
    const size_t n = items.size();
    // Nearest-integer train count: 2,744 items at 9/10 give 2,470.
    const auto train_count = static_cast<size_t>(
        (split_ratio.num * static_cast<int64_t>(n) + split_ratio.den / 2) / split_ratio.den);

    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    for (size_t i = n - 1; i > 0; --i) {
        size_t j = static_cast<size_t>(rng() % (i + 1));
        std::swap(order[i], order[j]);
    }
    for (size_t pos = 0; pos < n; ++pos) {
        items[order[pos]].split = pos < train_count ? Split::train : Split::test;
    }
    Dataset dataset;
    dataset.items = std::move(items);
    dataset.split_seed = seed;
    dataset.split_ratio = split_ratio;
    return dataset;
}

InformalizeReport informalize_corpus(Dataset& dataset, llm::Provider& provider, bool force) {
    InformalizeReport report;
    for (auto& item : dataset.items) {
        if (item.informalization && !force) {
            ++report.skipped;
            continue;
        }
        auto prompt = prompts::render_informalization(item.formal_statement);
        llm::CompletionRequest request{prompt.text, {}, provider.name()};
        try {
            auto result = provider.complete(request);
            item.informalization = result.text;
            ++report.populated;
        } catch (const llm::ProviderError& e) {
            report.failures.emplace_back(item.id, e.what());
        }
    }
    return report;
}

namespace {

json item_to_json(const CorpusItem& item) {
    json j;
    j["id"] = item.id;
    j["kind"] = std::string(kind_name(item.kind));
    j["locale"] = item.locale ? json(*item.locale) : json(nullptr);
    j["name"] = item.name;
    j["formal_statement"] = item.formal_statement;
    j["comment"] = item.comment;
    j["proof"] = item.proof ? json(*item.proof) : json(nullptr);
    j["informalization"] = item.informalization ? json(*item.informalization) : json(nullptr);
    j["source_file"] = item.source_file;
    j["split"] = std::string(split_name(item.split));
    return j;
}

std::string require_string(const json& j, const char* field, size_t line_no) {
    if (!j.contains(field) || !j[field].is_string()) {
        throw SchemaError("line " + std::to_string(line_no) + ": missing or non-string field '" +
                          field + "'");
    }
    return j[field].get<std::string>();
}

std::optional<std::string> optional_string(const json& j, const char* field, size_t line_no) {
    if (!j.contains(field)) {
        throw SchemaError("line " + std::to_string(line_no) + ": missing field '" + field + "'");
    }
    if (j[field].is_null()) return std::nullopt;
    if (!j[field].is_string()) {
        throw SchemaError("line " + std::to_string(line_no) + ": field '" + field +
                          "' must be string or null");
    }
    return j[field].get<std::string>();
}

CorpusItem item_from_json(const json& j, size_t line_no) {
    CorpusItem item;
    item.id = require_string(j, "id", line_no);
    auto kind = kind_from_name(require_string(j, "kind", line_no));
    if (!kind) throw SchemaError("line " + std::to_string(line_no) + ": unknown kind");
    item.kind = *kind;
    item.locale = optional_string(j, "locale", line_no);
    item.name = require_string(j, "name", line_no);
    item.formal_statement = require_string(j, "formal_statement", line_no);
    if (item.formal_statement.empty()) {
        throw SchemaError("line " + std::to_string(line_no) + ": empty formal_statement");
    }
    if (item.formal_statement.rfind(std::string(kind_name(item.kind)), 0) != 0) {
        throw SchemaError("line " + std::to_string(line_no) +
                          ": formal_statement must begin with its kind keyword");
    }
    item.comment = require_string(j, "comment", line_no);
    item.proof = optional_string(j, "proof", line_no);
    item.informalization = optional_string(j, "informalization", line_no);
    item.source_file = require_string(j, "source_file", line_no);
    auto split = split_from_name(require_string(j, "split", line_no));
    if (!split) throw SchemaError("line " + std::to_string(line_no) + ": unknown split");
    item.split = *split;
    return item;
}

}  // namespace

std::string dataset_to_jsonl(const Dataset& dataset) {
    std::string out;
    json header;
    header["schema"] = "autoform.dataset/1";
    header["split_seed"] = dataset.split_seed;
    header["split_ratio"] = {{"num", dataset.split_ratio.num}, {"den", dataset.split_ratio.den}};
    out += header.dump();
    out += '\n';
    for (const auto& item : dataset.items) {
        out += item_to_json(item).dump();
        out += '\n';
    }
    return out;
}

Dataset dataset_from_jsonl(std::string_view text) {
    Dataset dataset;
    auto lines = split_lines(text);
    if (lines.empty()) throw SchemaError("line 1: missing dataset header");
    json header;
    try {
        header = json::parse(lines[0]);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("line 1: ") + e.what());
    }
    if (!header.contains("schema") || header["schema"] != "autoform.dataset/1") {
        throw SchemaError("line 1: unsupported dataset schema");
    }
    dataset.split_seed = header.value("split_seed", uint64_t{0});
    if (header.contains("split_ratio")) {
        dataset.split_ratio.num = header["split_ratio"].value("num", int64_t{9});
        dataset.split_ratio.den = header["split_ratio"].value("den", int64_t{10});
    }
    std::set<std::string> seen_ids;
    for (size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        json j;
        try {
            j = json::parse(lines[i]);
        } catch (const json::exception& e) {
            throw SchemaError("line " + std::to_string(i + 1) + ": " + e.what());
        }
        auto item = item_from_json(j, i + 1);
        if (!seen_ids.insert(item.id).second) {
            throw SchemaError("line " + std::to_string(i + 1) + ": duplicate id " + item.id);
        }
        dataset.items.push_back(std::move(item));
    }
    return dataset;
}

void save_dataset(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path);
    out << dataset_to_jsonl(dataset);
    if (!out) throw Error("write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return dataset_from_jsonl(buffer.str());
}

}  // namespace autoform::corpus
