#pragma once

#include "vtseg/predictor.hpp"
#include "vtseg/volume.hpp"

#include <vector>

namespace vtseg {

// Sliding-window cover of a volume. starts are enumerated z-major, then y,
// then x ascending; the final start per axis is clamped to dim - patch so
// every voxel is covered.
struct TilingPlan {
    Size3 patch_size{0, 0, 0};
    Size3 stride{0, 0, 0};
    std::vector<PatchSpec> starts;
};

TilingPlan plan_tiling(const Index3& dims, const Size3& patch_size, const Size3& stride);

// Per-voxel (weighted sum, weight) pair for overlap averaging. Weights are
// uniform (1 per contributing patch), kept in 64-bit floats. Accumulation
// order is the caller's; pipelines always accumulate in canonical tile order
// so outputs are bit-identical for any worker count.
class FusionAccumulator {
public:
    FusionAccumulator(const Index3& dims, const Vec3& spacing, const Vec3& origin);

    void add(const Volume& patch_prob, const PatchSpec& loc);

    // weighted_sum / weight where weight > 0, 0 elsewhere.
    Volume finalize() const;

    const GridArray<double>& weighted_sum() const { return weighted_sum_; }
    const GridArray<double>& weight() const { return weight_; }
    const Index3& dims() const { return dims_; }

private:
    Index3 dims_;
    Vec3 spacing_;
    Vec3 origin_;
    GridArray<double> weighted_sum_;
    GridArray<double> weight_;
};

// Coarse stage: tile the volume, classify every tile, average overlaps.
Volume run_coarse(const Volume& v, const PredictorSpec& predictor, const Size3& patch_size,
                  const Size3& stride, int workers = 1);

// Shared by the coarse and fine stages: classify `locations` in parallel
// batches and accumulate the results in canonical (given) order.
void predict_and_accumulate(FusionAccumulator& acc, const Volume& v,
                            const PredictorSpec& predictor,
                            const std::vector<PatchSpec>& locations, int workers);

} // namespace vtseg
