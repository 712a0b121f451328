#pragma once

#include "vtseg/types.hpp"

#include <utility>

namespace vtseg {

enum class VoxelKind { HU, Probability, Label };
enum class SourceTag { K, R, D, Unknown };

const char* to_string(VoxelKind k);
const char* to_string(SourceTag t);
SourceTag source_tag_from_string(const std::string& s);

// An axis-aligned subgrid: start index plus size, both in voxels.
struct PatchSpec {
    Index3 start{0, 0, 0};
    Size3 size{0, 0, 0};

    bool valid_for(const Index3& dims) const
    {
        return (start >= 0).all() && (size > 0).all() && ((start + size) <= dims).all();
    }
    void require_valid(const Index3& dims) const;
    std::int64_t volume() const { return voxel_count(size); }
};

// A 3D scalar grid with physical spacing and origin (mm) and an intensity-kind
// tag. Immutable after construction; values are stored as doubles in x-fastest
// linear order regardless of any on-disk precision.
class Volume {
public:
    Volume(Index3 dims, Vec3 spacing, Vec3 origin, VoxelKind kind, GridArray<double> data);

    static Volume filled(const Index3& dims, const Vec3& spacing, const Vec3& origin,
                         VoxelKind kind, double value);

    const Index3& dims() const { return dims_; }
    const Vec3& spacing() const { return spacing_; }
    const Vec3& origin() const { return origin_; }
    VoxelKind kind() const { return kind_; }
    const GridArray<double>& data() const { return data_; }
    std::int64_t size() const { return data_.size(); }

    double at(int x, int y, int z) const { return data_[linear_index(x, y, z, dims_)]; }
    double at(const Index3& p) const { return data_[linear_index(p, dims_)]; }
    double operator[](std::int64_t i) const { return data_[i]; }

    bool same_grid(const Volume& other) const
    {
        return (dims_ == other.dims_).all() && (spacing_ == other.spacing_).all();
    }

    // Returns a copy with a different kind tag; values must satisfy the target
    // kind's invariant.
    Volume retagged(VoxelKind kind) const;

private:
    Index3 dims_;
    Vec3 spacing_;
    Vec3 origin_;
    VoxelKind kind_;
    GridArray<double> data_;
};

// Intensity harmonization: tags K and R subtract 1024 from every voxel,
// D and Unknown pass through unchanged. Input must be HU. Not idempotent for
// K/R; callers track application with a provenance flag.
Volume harmonize(const Volume& v, SourceTag tag);

// Advisory heuristic: true when the intensity statistics look like an
// unshifted K/R-style volume (median of values above the 99th percentile
// exceeds 500). Never applied automatically.
bool suggest_shift(const Volume& v);

// Copies the addressed subgrid; spacing is kept, origin translated by
// start * spacing, kind copied. No resampling.
Volume extract_patch(const Volume& v, const PatchSpec& p);

// Places a patch of `size` centered at `center`, clamping the start into
// [0, dim - size] per axis. Always yields a valid PatchSpec when
// size <= dims and center is in bounds.
PatchSpec clamp_patch_at(const Index3& center, const Size3& size, const Index3& dims);

} // namespace vtseg
