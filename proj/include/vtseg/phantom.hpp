#pragma once

#include "vtseg/volume.hpp"

#include <cstdint>
#include <vector>

namespace vtseg {

// Procedural vessel-tree phantom: one straight trunk spanning the volume in z
// plus seeded straight branches, all realized as capsules (distance to
// segment <= radius). Voxel membership uses the same distance test, so the
// generator doubles as its own oracle.
struct PhantomSpec {
    Index3 dims{128, 128, 128};
    Vec3 spacing{1.0, 1.0, 1.0};
    std::uint64_t seed = 1;
    double trunk_radius = 6.0; // voxels (at the smallest spacing)
    int branch_count = 3;
    double branch_radius_ratio = 0.7; // in (0, 1]
    double lumen_hu = 276.0;
    double background_hu = 40.0;
    double noise_sd = 0.0; // HU
    // K/R emulate the raw multi-center convention: all HU offset by +1024.
    SourceTag source_style = SourceTag::D;

    void validate() const;
};

struct PhantomPair {
    Volume hu;
    Volume mask;
};

PhantomPair generate(const PhantomSpec& spec);

// The generating polyline vertices (trunk endpoints, then attach/end point
// per branch), in voxel-index coordinates.
std::vector<Vec3> axis_points(const PhantomSpec& spec);

// Phantom spec text file: flat "key = value" lines, same syntax as the
// pipeline config.
PhantomSpec phantom_spec_from_text(const std::string& text);
std::string phantom_spec_to_text(const PhantomSpec& spec);

} // namespace vtseg
