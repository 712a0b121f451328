#pragma once

#include "vtseg/volume.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace vtseg {

// Ordered, deduplicated voxel coordinates proposing fine-stage patch centers.
// d_min records the minimum pairwise separation the set was built with
// (0 for a dense set).
struct CenterSet {
    std::vector<Index3> points;
    int d_min = 0;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

// Pseudo-centerline of a binary mask: slice the mask along each of the three
// axes (z, then y, then x sweeps; slices ascending), take the centroid of
// every 2D component (labels ascending), round to the nearest voxel and merge
// the three sweeps with exact-voxel dedup. Rounded centroids farther than
// 1 voxel (Chebyshev) from foreground are dropped.
CenterSet pseudo_centerline(const Volume& coarse_mask, int connectivity2d = 8);

// Greedy filter in canonical order: keep a point iff its Euclidean distance
// to every already-kept point is >= d_min. d_min = 0 returns the input.
CenterSet sparsify(const CenterSet& dense, int d_min);

struct CoverageReport {
    std::vector<Index3> uncovered; // foreground voxels not covered by any patch
    std::int64_t foreground = 0;

    bool full() const { return uncovered.empty(); }
};

// Which foreground voxels lie outside every center's footprint? A center's
// footprint is the set of voxels within fine_patch/2 per axis (Chebyshev) of
// its border-clamped patch center. An empty report means the fine stage can
// reach all proposed foreground.
CoverageReport coverage_check(const CenterSet& centers, const Volume& mask,
                              const Size3& fine_patch);

// Plain-text serialization, one "x y z" triple per line, canonical order.
std::string centers_to_text(const CenterSet& centers);
CenterSet centers_from_text(const std::string& text);
void write_centers_file(const std::string& path, const CenterSet& centers);
CenterSet read_centers_file(const std::string& path);

} // namespace vtseg
