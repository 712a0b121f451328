#include "vtseg/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <vector>

namespace vtseg {

namespace {

double window_response(double x, const WindowPredictor& w)
{
    if (x >= w.lo && x <= w.hi)
        return 1.0;
    if (w.softness <= 0.0)
        return 0.0;
    if (x < w.lo && x >= w.lo - w.softness)
        return (x - (w.lo - w.softness)) / w.softness;
    if (x > w.hi && x <= w.hi + w.softness)
        return ((w.hi + w.softness) - x) / w.softness;
    return 0.0;
}

Volume predict_window(const WindowPredictor& w, const Volume& patch)
{
    GridArray<double> out(patch.size());
    for (std::int64_t i = 0; i < patch.size(); ++i)
        out[i] = window_response(patch[i], w);
    return Volume(patch.dims(), patch.spacing(), patch.origin(), VoxelKind::Probability,
                  std::move(out));
}

Volume predict_probfile(const ProbFilePredictor& p, const Volume& patch,
                        const PatchSpec& location)
{
    if ((location.size != patch.dims()).any())
        throw DomainError("patch dims do not match its location spec");
    location.require_valid(p.probabilities.dims());
    return extract_patch(p.probabilities, location);
}

Volume predict_oracle(const OraclePredictor& o, const Volume& patch, const PatchSpec& location)
{
    if ((location.size != patch.dims()).any())
        throw DomainError("patch dims do not match its location spec");
    location.require_valid(o.reference.dims());
    Volume ref = extract_patch(o.reference, location);
    if (o.noise_sd <= 0.0)
        return ref.retagged(VoxelKind::Probability);

    std::mt19937_64 rng(mix_seed(o.seed, static_cast<std::uint64_t>(location.start.x()),
                                 static_cast<std::uint64_t>(location.start.y()),
                                 static_cast<std::uint64_t>(location.start.z())));
    std::normal_distribution<double> noise(0.0, o.noise_sd);
    GridArray<double> out(ref.size());
    for (std::int64_t i = 0; i < ref.size(); ++i)
        out[i] = std::clamp(ref[i] + noise(rng), 0.0, 1.0);
    return Volume(ref.dims(), ref.spacing(), ref.origin(), VoxelKind::Probability,
                  std::move(out));
}

} // namespace

void validate_predictor(const PredictorSpec& spec, const Index3& target_dims)
{
    if (const auto* w = std::get_if<WindowPredictor>(&spec)) {
        if (!(w->lo < w->hi))
            throw DomainError("window predictor requires lo < hi");
        if (w->softness < 0.0)
            throw DomainError("window softness must be >= 0");
    } else if (const auto* p = std::get_if<ProbFilePredictor>(&spec)) {
        if (p->probabilities.kind() != VoxelKind::Probability)
            throw DomainError("probfile predictor requires a probability volume");
        if ((p->probabilities.dims() != target_dims).any())
            throw DomainError("probfile volume dims do not match the target volume");
    } else if (const auto* o = std::get_if<OraclePredictor>(&spec)) {
        if (o->reference.kind() != VoxelKind::Label)
            throw DomainError("oracle predictor requires a label volume");
        if ((o->reference.dims() != target_dims).any())
            throw DomainError("oracle reference dims do not match the target volume");
        if (o->noise_sd < 0.0)
            throw DomainError("oracle noise_sd must be >= 0");
    }
}

Volume predict(const PredictorSpec& spec, const Volume& patch, const PatchSpec& location)
{
    if (patch.kind() != VoxelKind::HU)
        throw DomainError("predict expects an HU patch");
    if (const auto* w = std::get_if<WindowPredictor>(&spec)) {
        if (!(w->lo < w->hi) || w->softness < 0.0)
            throw DomainError("invalid window predictor");
        return predict_window(*w, patch);
    }
    if (const auto* p = std::get_if<ProbFilePredictor>(&spec))
        return predict_probfile(*p, patch, location);
    return predict_oracle(std::get<OraclePredictor>(spec), patch, location);
}

std::pair<double, double> suggest_window(const Volume& v, double half_width)
{
    if (v.kind() != VoxelKind::HU)
        throw DomainError("suggest_window expects an HU volume");
    std::vector<double> sorted(v.data().data(), v.data().data() + v.size());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == sorted.back())
        throw DomainError("constant-valued volume has no contrast band");

    const std::size_t rank = static_cast<std::size_t>(
        std::ceil(0.95 * static_cast<double>(sorted.size())));
    const double p95 = sorted[std::min(rank, sorted.size()) - 1];

    // Mode of the tail above p95, on an integer-HU histogram.
    std::map<long long, std::int64_t> hist;
    for (auto it = std::upper_bound(sorted.begin(), sorted.end(), p95); it != sorted.end(); ++it)
        ++hist[static_cast<long long>(std::llround(*it))];
    if (hist.empty())
        throw DomainError("no values above the 95th percentile");
    long long mode = 0;
    std::int64_t best = -1;
    for (const auto& [bin, n] : hist)
        if (n > best) {
            best = n;
            mode = bin;
        }
    return {static_cast<double>(mode) - half_width, static_cast<double>(mode) + half_width};
}

} // namespace vtseg
