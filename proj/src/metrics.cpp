#include "vtseg/metrics.hpp"

#include "vtseg/morphology.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

namespace vtseg {

Confusion confusion(const Volume& pred, const Volume& truth)
{
    if (pred.kind() != VoxelKind::Label || truth.kind() != VoxelKind::Label)
        throw DomainError("confusion expects label volumes");
    if ((pred.dims() != truth.dims()).any())
        throw DomainError("confusion: dims mismatch");
    Confusion c;
    for (std::int64_t i = 0; i < pred.size(); ++i) {
        const bool p = pred[i] != 0.0;
        const bool t = truth[i] != 0.0;
        if (p && t)
            ++c.tp;
        else if (p && !t)
            ++c.fp;
        else if (!p && t)
            ++c.fn;
        else
            ++c.tn;
    }
    return c;
}

CountingMetrics counting_metrics(std::int64_t tp, std::int64_t fp, std::int64_t fn)
{
    CountingMetrics m;
    if (tp + fp + fn == 0) {
        m.dsc = m.iou = m.recall = m.precision = 1.0;
        m.both_empty = true;
        return m;
    }
    const double tpd = static_cast<double>(tp);
    m.dsc = 2.0 * tpd / static_cast<double>(2 * tp + fp + fn);
    m.iou = tpd / static_cast<double>(tp + fp + fn);
    m.recall = (tp + fn > 0) ? tpd / static_cast<double>(tp + fn) : 0.0;
    m.precision = (tp + fp > 0) ? tpd / static_cast<double>(tp + fp) : 0.0;
    return m;
}

namespace {

// Column-major 3 x n matrix of boundary voxel positions in millimeters.
Eigen::Matrix3Xd boundary_points_mm(const Volume& m)
{
    const std::vector<Index3> b = boundary_voxels(m);
    Eigen::Matrix3Xd pts(3, static_cast<Eigen::Index>(b.size()));
    for (std::size_t i = 0; i < b.size(); ++i)
        pts.col(static_cast<Eigen::Index>(i)) =
            (b[i].cast<double>() * m.spacing()).matrix();
    return pts;
}

// Sorted nearest-neighbor distances from each column of `from` to the point
// set `to`, in mm.
std::vector<double> directed_distances(const Eigen::Matrix3Xd& from, const Eigen::Matrix3Xd& to)
{
    std::vector<double> d(static_cast<std::size_t>(from.cols()));
    for (Eigen::Index i = 0; i < from.cols(); ++i)
        d[static_cast<std::size_t>(i)] =
            std::sqrt((to.colwise() - from.col(i)).colwise().squaredNorm().minCoeff());
    std::sort(d.begin(), d.end());
    return d;
}

// Nearest-rank percentile of an ascending list.
double percentile_of(const std::vector<double>& sorted, double percentile)
{
    const std::size_t rank = static_cast<std::size_t>(
        std::ceil(percentile / 100.0 * static_cast<double>(sorted.size())));
    return sorted[std::min(std::max<std::size_t>(rank, 1), sorted.size()) - 1];
}

struct DirectedDistances {
    std::vector<double> ab, ba;
};

DirectedDistances boundary_distances(const Volume& a, const Volume& b)
{
    if (a.kind() != VoxelKind::Label || b.kind() != VoxelKind::Label)
        throw DomainError("hausdorff expects label volumes");
    if ((a.dims() != b.dims()).any() || (a.spacing() != b.spacing()).any())
        throw DomainError("hausdorff: dims/spacing mismatch");
    const Eigen::Matrix3Xd pa = boundary_points_mm(a);
    const Eigen::Matrix3Xd pb = boundary_points_mm(b);
    if (pa.cols() == 0 || pb.cols() == 0)
        throw DomainError("hausdorff requires nonempty masks");
    return DirectedDistances{directed_distances(pa, pb), directed_distances(pb, pa)};
}

} // namespace

double hausdorff(const Volume& a, const Volume& b, double percentile)
{
    if (!(percentile > 0.0 && percentile <= 100.0))
        throw DomainError("hausdorff percentile must be in (0, 100]");
    const DirectedDistances d = boundary_distances(a, b);
    return std::max(percentile_of(d.ab, percentile), percentile_of(d.ba, percentile));
}

MetricsRow evaluate_case(const std::string& case_id, const Volume& pred, const Volume& truth)
{
    const Confusion c = confusion(pred, truth);
    const CountingMetrics m = counting_metrics(c.tp, c.fp, c.fn);
    MetricsRow row;
    row.case_id = case_id;
    row.dsc = m.dsc;
    row.iou = m.iou;
    row.recall = m.recall;
    row.precision = m.precision;
    row.both_empty = m.both_empty;
    const bool pred_empty = (c.tp + c.fp) == 0;
    const bool truth_empty = (c.tp + c.fn) == 0;
    if (!pred_empty && !truth_empty) {
        // one distance pass serves both percentiles
        const DirectedDistances d = boundary_distances(pred, truth);
        row.hd = std::max(percentile_of(d.ab, 100.0), percentile_of(d.ba, 100.0));
        row.hd95 = std::max(percentile_of(d.ab, 95.0), percentile_of(d.ba, 95.0));
    }
    return row;
}

MetricSummary summary_of(const MetricsRow& row)
{
    return MetricSummary{row.dsc, row.iou, row.recall, row.precision, row.hd, row.hd95};
}

MetricSummary aggregate_folds(const std::vector<MetricSummary>& rows)
{
    if (rows.empty())
        throw DomainError("aggregate_folds requires at least one row");
    MetricSummary mean;
    double hd_sum = 0, hd95_sum = 0;
    bool all_hd = true, all_hd95 = true;
    for (const MetricSummary& r : rows) {
        mean.dsc += r.dsc;
        mean.iou += r.iou;
        mean.recall += r.recall;
        mean.precision += r.precision;
        if (r.hd)
            hd_sum += *r.hd;
        else
            all_hd = false;
        if (r.hd95)
            hd95_sum += *r.hd95;
        else
            all_hd95 = false;
    }
    const double n = static_cast<double>(rows.size());
    mean.dsc /= n;
    mean.iou /= n;
    mean.recall /= n;
    mean.precision /= n;
    if (all_hd)
        mean.hd = hd_sum / n;
    if (all_hd95)
        mean.hd95 = hd95_sum / n;
    return mean;
}

double round_pct_1dp(double v)
{
    return std::floor(v * 10.0 + 0.5) / 10.0;
}

std::vector<std::int64_t> FoldSplit::fold_sizes() const
{
    std::vector<std::int64_t> sizes(static_cast<std::size_t>(k), 0);
    for (const auto& [id, f] : fold_of)
        ++sizes[static_cast<std::size_t>(f)];
    return sizes;
}

FoldSplit make_folds(std::vector<std::string> case_ids, int k, std::uint64_t seed)
{
    if (k < 2)
        throw DomainError("make_folds requires k >= 2");
    if (case_ids.size() < static_cast<std::size_t>(k))
        throw DomainError("fewer cases than folds");
    FoldSplit split;
    split.seed = seed;
    split.k = k;
    split.case_ids = case_ids;

    // Explicit Fisher-Yates so the split depends only on the seed.
    std::vector<std::string> shuffled = case_ids;
    std::mt19937_64 rng(mix_seed(seed));
    for (std::size_t i = shuffled.size() - 1; i > 0; --i) {
        const std::uint64_t j = rng() % (i + 1);
        std::swap(shuffled[i], shuffled[static_cast<std::size_t>(j)]);
    }
    for (std::size_t i = 0; i < shuffled.size(); ++i)
        split.fold_of[shuffled[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    return split;
}

std::string folds_to_text(const FoldSplit& split)
{
    std::ostringstream os;
    os << "# vtseg folds v1\n";
    os << "seed " << split.seed << "\n";
    os << "k " << split.k << "\n";
    for (const std::string& id : split.case_ids)
        os << "case " << id << " fold " << split.fold_of.at(id) << "\n";
    return os.str();
}

FoldSplit folds_from_text(const std::string& text)
{
    FoldSplit split;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "seed")
            ls >> split.seed;
        else if (tag == "k")
            ls >> split.k;
        else if (tag == "case") {
            std::string id, foldword;
            int f = -1;
            if (!(ls >> id >> foldword >> f) || foldword != "fold")
                throw FormatError("folds file: bad case record '" + line + "'");
            split.case_ids.push_back(id);
            split.fold_of[id] = f;
        } else {
            throw FormatError("folds file: unknown record '" + tag + "'");
        }
    }
    if (split.k < 2 || split.case_ids.empty())
        throw FormatError("folds file: missing k or case records");
    return split;
}

namespace {

std::string fmt_full(double v)
{
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string fmt_opt(const std::optional<double>& v)
{
    return v ? fmt_full(*v) : "-";
}

std::string fmt_pct(double fraction)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(1) << round_pct_1dp(fraction * 100.0);
    return os.str();
}

void emit_summary(std::ostringstream& os, const std::string& label, const MetricSummary& s,
                  std::size_t n)
{
    os << label << " cases " << n << " dsc_pct " << fmt_pct(s.dsc) << " iou_pct "
       << fmt_pct(s.iou) << " recall_pct " << fmt_pct(s.recall) << " precision_pct "
       << fmt_pct(s.precision) << " dsc " << fmt_full(s.dsc) << " iou " << fmt_full(s.iou)
       << " recall " << fmt_full(s.recall) << " precision " << fmt_full(s.precision) << " hd "
       << fmt_opt(s.hd) << " hd95 " << fmt_opt(s.hd95) << "\n";
}

} // namespace

std::string report_to_text(const std::vector<MetricsRow>& rows, const FoldSplit* folds)
{
    std::ostringstream os;
    os << "# vtseg metrics report v1\n";
    for (const MetricsRow& r : rows) {
        os << "case " << r.case_id << " dsc " << fmt_full(r.dsc) << " iou " << fmt_full(r.iou)
           << " recall " << fmt_full(r.recall) << " precision " << fmt_full(r.precision)
           << " hd " << fmt_opt(r.hd) << " hd95 " << fmt_opt(r.hd95) << " both_empty "
           << (r.both_empty ? 1 : 0) << "\n";
    }
    std::vector<MetricSummary> fold_means;
    if (folds && folds->k > 0) {
        for (int f = 0; f < folds->k; ++f) {
            std::vector<MetricSummary> members;
            for (const MetricsRow& r : rows) {
                const auto it = folds->fold_of.find(r.case_id);
                if (it != folds->fold_of.end() && it->second == f)
                    members.push_back(summary_of(r));
            }
            if (members.empty())
                continue;
            const MetricSummary m = aggregate_folds(members);
            emit_summary(os, "fold " + std::to_string(f), m, members.size());
            fold_means.push_back(m);
        }
    }
    if (!rows.empty()) {
        std::vector<MetricSummary> all;
        all.reserve(rows.size());
        for (const MetricsRow& r : rows)
            all.push_back(summary_of(r));
        emit_summary(os, "overall", aggregate_folds(all), rows.size());
        if (!fold_means.empty())
            emit_summary(os, "average_of_folds", aggregate_folds(fold_means),
                         fold_means.size());
    }
    return os.str();
}

} // namespace vtseg
