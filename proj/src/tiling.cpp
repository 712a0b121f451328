#include "vtseg/tiling.hpp"

#include "vtseg/parallel.hpp"

#include <optional>

namespace vtseg {

namespace {

std::vector<int> axis_starts(int dim, int patch, int stride)
{
    std::vector<int> out;
    const int last = dim - patch;
    for (int k = 0;; ++k) {
        const std::int64_t s = static_cast<std::int64_t>(k) * stride;
        if (s >= last) {
            out.push_back(last);
            break;
        }
        out.push_back(static_cast<int>(s));
    }
    return out;
}

} // namespace

TilingPlan plan_tiling(const Index3& dims, const Size3& patch_size, const Size3& stride)
{
    if ((patch_size > dims).any())
        throw DomainError("patch size exceeds volume dims");
    if ((stride < 1).any() || (stride > patch_size).any())
        throw DomainError("stride must satisfy 1 <= stride <= patch size per axis");

    const auto xs = axis_starts(dims.x(), patch_size.x(), stride.x());
    const auto ys = axis_starts(dims.y(), patch_size.y(), stride.y());
    const auto zs = axis_starts(dims.z(), patch_size.z(), stride.z());

    TilingPlan plan;
    plan.patch_size = patch_size;
    plan.stride = stride;
    plan.starts.reserve(xs.size() * ys.size() * zs.size());
    for (int z : zs)
        for (int y : ys)
            for (int x : xs)
                plan.starts.push_back(PatchSpec{Index3(x, y, z), patch_size});
    return plan;
}

FusionAccumulator::FusionAccumulator(const Index3& dims, const Vec3& spacing, const Vec3& origin)
    : dims_(dims), spacing_(spacing), origin_(origin),
      weighted_sum_(GridArray<double>::Zero(voxel_count(dims))),
      weight_(GridArray<double>::Zero(voxel_count(dims)))
{
}

void FusionAccumulator::add(const Volume& patch_prob, const PatchSpec& loc)
{
    if ((patch_prob.dims() != loc.size).any())
        throw DomainError("patch dims do not match its location spec");
    loc.require_valid(dims_);
    std::int64_t src = 0;
    for (int z = 0; z < loc.size.z(); ++z)
        for (int y = 0; y < loc.size.y(); ++y) {
            const std::int64_t row =
                linear_index(loc.start.x(), loc.start.y() + y, loc.start.z() + z, dims_);
            weighted_sum_.segment(row, loc.size.x()) +=
                patch_prob.data().segment(src, loc.size.x());
            weight_.segment(row, loc.size.x()) += 1.0;
            src += loc.size.x();
        }
}

Volume FusionAccumulator::finalize() const
{
    GridArray<double> out =
        (weight_ > 0.0).select(weighted_sum_ / weight_, GridArray<double>::Zero(weight_.size()));
    return Volume(dims_, spacing_, origin_, VoxelKind::Probability, std::move(out));
}

void predict_and_accumulate(FusionAccumulator& acc, const Volume& v,
                            const PredictorSpec& predictor,
                            const std::vector<PatchSpec>& locations, int workers)
{
    const std::size_t batch = static_cast<std::size_t>(std::max(1, workers)) * 4;
    std::vector<std::optional<Volume>> predicted(std::min(batch, locations.size()));
    for (std::size_t base = 0; base < locations.size(); base += batch) {
        const std::size_t n = std::min(batch, locations.size() - base);
        parallel_for_index(static_cast<std::int64_t>(n), workers, [&](std::int64_t i) {
            const PatchSpec& loc = locations[base + i];
            predicted[i] = predict(predictor, extract_patch(v, loc), loc);
        });
        // merge in canonical order: output is independent of worker count
        for (std::size_t i = 0; i < n; ++i) {
            acc.add(*predicted[i], locations[base + i]);
            predicted[i].reset();
        }
    }
}

Volume run_coarse(const Volume& v, const PredictorSpec& predictor, const Size3& patch_size,
                  const Size3& stride, int workers)
{
    if (v.kind() != VoxelKind::HU)
        throw DomainError("run_coarse expects an HU volume");
    validate_predictor(predictor, v.dims());
    const TilingPlan plan = plan_tiling(v.dims(), patch_size, stride);
    FusionAccumulator acc(v.dims(), v.spacing(), v.origin());
    predict_and_accumulate(acc, v, predictor, plan.starts, workers);
    return acc.finalize();
}

} // namespace vtseg
