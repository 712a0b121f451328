#pragma once

#include "vtseg/volume.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vtseg {

struct Confusion {
    std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

Confusion confusion(const Volume& pred, const Volume& truth);

struct CountingMetrics {
    double dsc = 0, iou = 0, recall = 0, precision = 0;
    bool both_empty = false; // dsc = iou = recall = precision = 1 by convention
};

CountingMetrics counting_metrics(std::int64_t tp, std::int64_t fp, std::int64_t fn);

// Surface distance between two masks at a percentile of the directed
// boundary-to-boundary distances (nearest-rank), in millimeters.
// percentile = 100 is the Hausdorff distance; 95 the common HD95.
// Both masks must be nonempty and share dims and spacing.
double hausdorff(const Volume& a, const Volume& b, double percentile = 100.0);

// Per-case evaluation record. hd/hd95 are absent when either mask is empty.
struct MetricsRow {
    std::string case_id;
    double dsc = 0, iou = 0, recall = 0, precision = 0;
    std::optional<double> hd, hd95;
    bool both_empty = false;
};

MetricsRow evaluate_case(const std::string& case_id, const Volume& pred, const Volume& truth);

// A metric tuple without case identity, used for fold means and the overall
// average row.
struct MetricSummary {
    double dsc = 0, iou = 0, recall = 0, precision = 0;
    std::optional<double> hd, hd95;
};

MetricSummary summary_of(const MetricsRow& row);
// Arithmetic mean per metric. hd/hd95 are averaged only when present in
// every input row.
MetricSummary aggregate_folds(const std::vector<MetricSummary>& rows);

// Reporting-layer rounding: percentages at 1 decimal, half up.
double round_pct_1dp(double fraction_or_pct);

struct FoldSplit {
    std::vector<std::string> case_ids;
    std::map<std::string, int> fold_of;
    std::uint64_t seed = 0;
    int k = 0;

    std::vector<std::int64_t> fold_sizes() const;
};

// Seeded Fisher-Yates shuffle then round-robin assignment; fold sizes differ
// by at most one.
FoldSplit make_folds(std::vector<std::string> case_ids, int k, std::uint64_t seed);

std::string folds_to_text(const FoldSplit& split);
FoldSplit folds_from_text(const std::string& text);

// Metrics report: one "case" record per row, then per-fold "fold" records and
// one "average" record (percentages, 1 decimal, alongside full-precision
// fractions). Stable schema for diff-based checks.
std::string report_to_text(const std::vector<MetricsRow>& rows, const FoldSplit* folds = nullptr);

} // namespace vtseg
