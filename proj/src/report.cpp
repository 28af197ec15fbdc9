#include "autoform/report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace autoform::report {

namespace {

std::string format_value(double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.2f", v);
    return buffer;
}

std::string format_delta(double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%+.2f", v);
    return buffer;
}

std::string pad(std::string s, size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

struct Column {
    const char* name;
    std::optional<double> (*get)(const AggregateRow&);
};

const std::vector<Column>& metric_columns() {
    static const std::vector<Column> columns = {
        {"BLEU-2", [](const AggregateRow& r) { return std::optional<double>(r.bleu2); }},
        {"ChrF", [](const AggregateRow& r) { return std::optional<double>(r.chrf); }},
        {"RUBY", [](const AggregateRow& r) { return std::optional<double>(r.ruby); }},
        {"CBS", [](const AggregateRow& r) { return r.cbs; }},
        {"Pass", [](const AggregateRow& r) { return std::optional<double>(r.pass); }},
    };
    return columns;
}

std::string render_grid(const std::vector<std::string>& header,
                        const std::vector<std::vector<std::string>>& cells) {
    std::vector<size_t> widths(header.size());
    for (size_t c = 0; c < header.size(); ++c) widths[c] = header[c].size();
    for (const auto& row : cells) {
        for (size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
    }
    std::string out;
    auto emit_row = [&](const std::vector<std::string>& row) {
        for (size_t c = 0; c < row.size(); ++c) {
            out += pad(row[c], widths[c]);
            if (c + 1 < row.size()) out += "  ";
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        out += '\n';
    };
    emit_row(header);
    size_t total = 0;
    for (size_t c = 0; c < widths.size(); ++c) total += widths[c] + (c + 1 < widths.size() ? 2 : 0);
    out += std::string(total, '-') + "\n";
    for (const auto& row : cells) emit_row(row);
    return out;
}

}  // namespace

AggregateRow aggregate_from_run(const pipeline::RunRecord& run, const std::string& label) {
    AggregateRow row;
    row.label = label;
    row.checker_backend = run.checker_backend;
    size_t n = 0;
    size_t cbs_n = 0;
    size_t passed = 0;
    double bleu_sum = 0;
    for (const auto& item : run.items) {
        if (!item.scores) continue;
        ++n;
        bleu_sum += item.scores->bleu2;
        row.chrf += item.scores->chrf;
        row.ruby += item.scores->ruby;
        if (item.scores->cbs) {
            row.cbs = row.cbs.value_or(0.0) + *item.scores->cbs;
            ++cbs_n;
        }
        if (item.scores->pass) ++passed;
    }
    if (n == 0) return row;
    row.bleu2_mean_sentence = bleu_sum / static_cast<double>(n);
    row.bleu2 = row.bleu2_mean_sentence;  // corpus-level value needs ground truths
    row.chrf /= static_cast<double>(n);
    row.ruby /= static_cast<double>(n);
    if (row.cbs) row.cbs = *row.cbs / static_cast<double>(cbs_n);
    row.pass = 100.0 * static_cast<double>(passed) / static_cast<double>(n);
    return row;
}

Report evaluate(const pipeline::RunRecord& run, const corpus::Dataset& dataset,
                checker::Checker& checker_backend, metrics::EmbeddingProvider* embedder,
                const std::string& label) {
    Report report;
    report.label = label;
    report.aggregate.label = label;
    report.aggregate.checker_backend = checker_backend.backend_name();

    metrics::Bleu2Accumulator corpus_bleu;
    size_t passed = 0;
    size_t cbs_n = 0;
    double cbs_sum = 0;
    for (const auto& item : run.items) {
        const auto* truth = dataset.find(item.item_id);
        if (!truth) {
            report.warnings.push_back("item " + item.item_id +
                                      " has no ground truth in the dataset; excluded");
            continue;
        }
        if (item.status != "ok") {
            report.warnings.push_back("item " + item.item_id + " failed during the run: " +
                                      item.error);
            continue;
        }
        metrics::MetricVector v;
        v.bleu2 = metrics::bleu2(truth->formal_statement, item.final_output);
        v.chrf = metrics::chrf(truth->formal_statement, item.final_output);
        v.ruby = metrics::ruby(truth->formal_statement, item.final_output);
        if (embedder) {
            v.cbs = metrics::cbs(*embedder, truth->formal_statement, item.final_output);
            cbs_sum += *v.cbs;
            ++cbs_n;
        }
        v.pass = checker::passes(checker_backend.check(item.final_output));
        if (v.pass) ++passed;
        corpus_bleu.add(truth->formal_statement, item.final_output);
        report.per_item.push_back({item.item_id, v});
    }

    const size_t n = report.per_item.size();
    if (n > 0) {
        double bleu_sum = 0, chrf_sum = 0, ruby_sum = 0;
        for (const auto& row : report.per_item) {
            bleu_sum += row.scores.bleu2;
            chrf_sum += row.scores.chrf;
            ruby_sum += row.scores.ruby;
        }
        report.aggregate.bleu2 = corpus_bleu.score();
        report.aggregate.bleu2_mean_sentence = bleu_sum / static_cast<double>(n);
        report.aggregate.chrf = chrf_sum / static_cast<double>(n);
        report.aggregate.ruby = ruby_sum / static_cast<double>(n);
        if (cbs_n > 0) report.aggregate.cbs = cbs_sum / static_cast<double>(cbs_n);
        report.aggregate.pass = 100.0 * static_cast<double>(passed) / static_cast<double>(n);
    }

    if (n >= 2) {
        std::vector<std::string> names = {"BLEU-2", "ChrF", "RUBY"};
        std::vector<std::vector<double>> columns(3);
        for (const auto& row : report.per_item) {
            columns[0].push_back(row.scores.bleu2);
            columns[1].push_back(row.scores.chrf);
            columns[2].push_back(row.scores.ruby);
        }
        if (cbs_n == n) {
            names.push_back("CBS");
            columns.emplace_back();
            for (const auto& row : report.per_item) columns.back().push_back(*row.scores.cbs);
        }
        names.push_back("Pass");
        columns.emplace_back();
        for (const auto& row : report.per_item) {
            columns.back().push_back(row.scores.pass ? 1.0 : 0.0);
        }
        report.correlation = metrics::pearson_matrix(names, columns);
    }
    return report;
}

std::string render_table(const std::vector<AggregateRow>& rows) {
    std::vector<std::string> header = {"Method", "BLEU-2", "ChrF", "RUBY", "CBS", "Pass",
                                       "Checker"};
    std::vector<std::vector<std::string>> cells;
    for (const auto& row : rows) {
        cells.push_back({row.label, format_value(row.bleu2), format_value(row.chrf),
                         format_value(row.ruby), row.cbs ? format_value(*row.cbs) : "-",
                         format_value(row.pass), row.checker_backend});
    }
    return render_grid(header, cells);
}

std::string compare_rows(const std::vector<AggregateRow>& rows,
                         const std::string& baseline_label) {
    const AggregateRow* baseline = nullptr;
    for (const auto& row : rows) {
        if (row.label == baseline_label) baseline = &row;
    }
    if (!baseline) throw Error("compare: baseline row not found: " + baseline_label);

    const auto& columns = metric_columns();
    // best value per metric column
    std::vector<std::optional<double>> best(columns.size());
    for (const auto& row : rows) {
        for (size_t c = 0; c < columns.size(); ++c) {
            auto v = columns[c].get(row);
            if (v && (!best[c] || *v > *best[c])) best[c] = *v;
        }
    }

    std::vector<std::string> header = {"Method"};
    for (const auto& column : columns) header.push_back(column.name);
    std::vector<std::vector<std::string>> cells;
    for (const auto& row : rows) {
        std::vector<std::string> line = {row.label};
        for (size_t c = 0; c < columns.size(); ++c) {
            auto v = columns[c].get(row);
            if (!v) {
                line.push_back("-");
                continue;
            }
            std::string cell = format_value(*v);
            auto base = columns[c].get(*baseline);
            if (row.label != baseline_label && base) {
                cell += " (" + format_delta(*v - *base) + ")";
            }
            if (best[c] && *v == *best[c]) cell += " *";
            line.push_back(std::move(cell));
        }
        cells.push_back(std::move(line));
    }
    return render_grid(header, cells);
}

std::string compare_runs(const std::vector<pipeline::RunRecord>& runs,
                         const std::vector<std::string>& labels,
                         const std::string& baseline_label) {
    if (runs.size() != labels.size()) throw Error("compare: one label per run required");
    if (runs.empty()) throw Error("compare: no runs");
    auto test_ids = [](const pipeline::RunRecord& run) {
        std::vector<std::string> ids;
        for (const auto& item : run.items) ids.push_back(item.item_id);
        std::sort(ids.begin(), ids.end());
        return ids;
    };
    auto reference_ids = test_ids(runs.front());
    for (size_t i = 1; i < runs.size(); ++i) {
        if (test_ids(runs[i]) != reference_ids) {
            throw Error("compare: runs evaluate different test splits (config " +
                        runs.front().config_hash + " vs config " + runs[i].config_hash + ")");
        }
    }
    std::vector<AggregateRow> rows;
    for (size_t i = 0; i < runs.size(); ++i) {
        rows.push_back(aggregate_from_run(runs[i], labels[i]));
    }
    if (runs.size() == 1) return render_table(rows);
    return compare_rows(rows, baseline_label);
}

std::string per_item_csv(const Report& report) {
    std::string out = "id,bleu2,chrf,ruby,cbs,pass\n";
    for (const auto& row : report.per_item) {
        out += row.id + "," + format_value(row.scores.bleu2) + "," +
               format_value(row.scores.chrf) + "," + format_value(row.scores.ruby) + ",";
        out += row.scores.cbs ? format_value(*row.scores.cbs) : "";
        out += ",";
        out += row.scores.pass ? "1" : "0";
        out += "\n";
    }
    return out;
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
    std::string out = "method,bleu2,bleu2_mean_sentence,chrf,ruby,cbs,pass,checker\n";
    for (const auto& row : rows) {
        out += row.label + "," + format_value(row.bleu2) + "," +
               format_value(row.bleu2_mean_sentence) + "," + format_value(row.chrf) + "," +
               format_value(row.ruby) + ",";
        out += row.cbs ? format_value(*row.cbs) : "";
        out += "," + format_value(row.pass) + "," + row.checker_backend + "\n";
    }
    return out;
}

std::string correlation_csv(const metrics::CorrelationMatrix& matrix) {
    std::string out = "metric";
    for (const auto& name : matrix.names) out += "," + name;
    out += "\n";
    for (size_t i = 0; i < matrix.names.size(); ++i) {
        out += matrix.names[i];
        for (size_t j = 0; j < matrix.names.size(); ++j) {
            out += ",";
            if (matrix.entries[i][j]) {
                char buffer[32];
                std::snprintf(buffer, sizeof(buffer), "%.6f", *matrix.entries[i][j]);
                out += buffer;
            }
        }
        out += "\n";
    }
    return out;
}

void write_report_files(const Report& report, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    auto write = [&out_dir](const std::string& name, const std::string& text) {
        std::ofstream out(out_dir + "/" + name, std::ios::binary);
        if (!out) throw Error("cannot write report file: " + out_dir + "/" + name);
        out << text;
    };
    write("report.txt", render_table({report.aggregate}));
    write("per_item.csv", per_item_csv(report));
    write("aggregate.csv", aggregate_csv({report.aggregate}));
    if (!report.correlation.names.empty()) {
        write("correlation.csv", correlation_csv(report.correlation));
    }
}

}  // namespace autoform::report
