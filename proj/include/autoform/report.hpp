#pragma once

#include <optional>
#include <string>
#include <vector>

#include "autoform/metrics.hpp"
#include "autoform/pipeline.hpp"

namespace autoform::report {

/// One table row in the published layout: BLEU-2, ChrF, RUBY, CBS, Pass.
struct AggregateRow {
    std::string label;
    double bleu2 = 0;  // corpus-level
    double bleu2_mean_sentence = 0;
    double chrf = 0;
    double ruby = 0;
    std::optional<double> cbs;
    double pass = 0;
    std::string checker_backend = "offline";
};

struct ItemScores {
    std::string id;
    metrics::MetricVector scores;
};

struct Report {
    std::string label;
    std::vector<ItemScores> per_item;
    AggregateRow aggregate;
    metrics::CorrelationMatrix correlation;
    std::vector<std::string> warnings;
};

/// Scores a run against the dataset ground truths: per-item metric vectors,
/// the aggregate row and the metric correlation matrix. Items without a
/// ground truth are excluded with a warning.
Report evaluate(const pipeline::RunRecord& run, const corpus::Dataset& dataset,
                checker::Checker& checker, metrics::EmbeddingProvider* embedder = nullptr,
                const std::string& label = "run");

/// Aggregate row recomputed from a run's stored per-item scores (used when
/// the dataset is not at hand, e.g. for comparisons).
AggregateRow aggregate_from_run(const pipeline::RunRecord& run, const std::string& label);

std::string render_table(const std::vector<AggregateRow>& rows);

/// Comparison table with per-metric deltas against the named baseline row,
/// rendered like the published "value (+delta)" layout. The best value per
/// column is marked with '*'.
std::string compare_rows(const std::vector<AggregateRow>& rows,
                         const std::string& baseline_label);

/// Comparison across run files. Runs must share the dataset and test
/// split; a mismatch names both config hashes.
std::string compare_runs(const std::vector<pipeline::RunRecord>& runs,
                         const std::vector<std::string>& labels,
                         const std::string& baseline_label);

std::string per_item_csv(const Report& report);
std::string aggregate_csv(const std::vector<AggregateRow>& rows);
std::string correlation_csv(const metrics::CorrelationMatrix& matrix);

/// Writes report.txt, per_item.csv, aggregate.csv and correlation.csv.
void write_report_files(const Report& report, const std::string& out_dir);

}  // namespace autoform::report
