#pragma once

#include "vtseg/volume.hpp"

#include <vector>

namespace vtseg {

// Dense component labeling of a 3D binary mask. Label 0 is background;
// labels 1..count are assigned in order of first-encountered voxel in
// x-fastest linear scan order.
struct ComponentLabeling {
    Index3 dims{0, 0, 0};
    Vec3 spacing{1, 1, 1};
    Vec3 origin{0, 0, 0};
    int connectivity = 26; // 6 or 26
    GridArray<std::int32_t> labels;
    int count = 0;
    std::vector<std::int64_t> sizes; // sizes[k-1] = voxels holding label k
};

// 2D binary grid (a slice), u-fastest linear order.
struct SliceMask {
    Eigen::Array2i dims{0, 0};
    GridArray<std::uint8_t> values;

    std::int64_t index(int u, int v) const
    {
        return u + static_cast<std::int64_t>(dims.x()) * v;
    }
};

struct ComponentLabeling2D {
    Eigen::Array2i dims{0, 0};
    int connectivity = 8; // 4 or 8
    GridArray<std::int32_t> labels;
    int count = 0;
    std::vector<std::int64_t> sizes;
};

ComponentLabeling label_components_3d(const Volume& mask, int connectivity = 26);
ComponentLabeling2D label_components_2d(const SliceMask& slice, int connectivity = 8);

// Arithmetic mean of member voxel indices, per axis.
Vec3 centroid(const ComponentLabeling& c, int label);
Eigen::Array2d centroid(const ComponentLabeling2D& c, int label);
// All component centroids in label order (1..count) in a single pass.
std::vector<Eigen::Array2d> centroids(const ComponentLabeling2D& c);

// Keeps only components with size >= min_size.
Volume filter_components(const ComponentLabeling& c, std::int64_t min_size);

// Foreground voxels with at least one background 6-neighbor; neighbors
// outside the volume count as background. Linear scan order.
std::vector<Index3> boundary_voxels(const Volume& mask);

} // namespace vtseg
