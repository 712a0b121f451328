#include "vtseg/volume.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace vtseg {

const char* to_string(VoxelKind k)
{
    switch (k) {
    case VoxelKind::HU: return "hu";
    case VoxelKind::Probability: return "probability";
    case VoxelKind::Label: return "label";
    }
    return "?";
}

const char* to_string(SourceTag t)
{
    switch (t) {
    case SourceTag::K: return "K";
    case SourceTag::R: return "R";
    case SourceTag::D: return "D";
    case SourceTag::Unknown: return "unknown";
    }
    return "?";
}

SourceTag source_tag_from_string(const std::string& s)
{
    if (s == "K" || s == "k") return SourceTag::K;
    if (s == "R" || s == "r") return SourceTag::R;
    if (s == "D" || s == "d") return SourceTag::D;
    if (s == "unknown" || s == "Unknown" || s == "U" || s == "u") return SourceTag::Unknown;
    throw ConfigError("unknown source tag '" + s + "' (expected K, R, D or unknown)");
}

void PatchSpec::require_valid(const Index3& dims) const
{
    if (!valid_for(dims)) {
        std::ostringstream os;
        os << "patch start (" << start.x() << "," << start.y() << "," << start.z() << ") size ("
           << size.x() << "," << size.y() << "," << size.z() << ") out of bounds for dims ("
           << dims.x() << "," << dims.y() << "," << dims.z() << ")";
        throw DomainError(os.str());
    }
}

namespace {

void check_kind_invariant(VoxelKind kind, const GridArray<double>& data)
{
    if (kind == VoxelKind::Probability) {
        // Written so NaN fails the test as well.
        for (Eigen::Index i = 0; i < data.size(); ++i)
            if (!(data[i] >= 0.0 && data[i] <= 1.0))
                throw DomainError("probability volume has values outside [0, 1]");
    } else if (kind == VoxelKind::Label) {
        for (Eigen::Index i = 0; i < data.size(); ++i)
            if (data[i] != 0.0 && data[i] != 1.0)
                throw DomainError("label volume has values outside {0, 1}");
    }
}

} // namespace

Volume::Volume(Index3 dims, Vec3 spacing, Vec3 origin, VoxelKind kind, GridArray<double> data)
    : dims_(dims), spacing_(spacing), origin_(origin), kind_(kind), data_(std::move(data))
{
    if ((dims_ <= 0).any())
        throw DomainError("volume dims must be positive");
    if ((spacing_ <= 0.0).any())
        throw DomainError("volume spacing must be positive");
    if (data_.size() != voxel_count(dims_))
        throw DomainError("volume data length does not match dims");
    check_kind_invariant(kind_, data_);
}

Volume Volume::filled(const Index3& dims, const Vec3& spacing, const Vec3& origin,
                      VoxelKind kind, double value)
{
    GridArray<double> data = GridArray<double>::Constant(voxel_count(dims), value);
    return Volume(dims, spacing, origin, kind, std::move(data));
}

Volume Volume::retagged(VoxelKind kind) const
{
    return Volume(dims_, spacing_, origin_, kind, data_);
}

Volume harmonize(const Volume& v, SourceTag tag)
{
    if (v.kind() != VoxelKind::HU)
        throw DomainError("harmonize expects an HU volume");
    if (tag == SourceTag::D || tag == SourceTag::Unknown)
        return v;
    GridArray<double> shifted = v.data() - 1024.0;
    return Volume(v.dims(), v.spacing(), v.origin(), VoxelKind::HU, std::move(shifted));
}

bool suggest_shift(const Volume& v)
{
    if (v.kind() != VoxelKind::HU)
        throw DomainError("suggest_shift expects an HU volume");
    std::vector<double> sorted(v.data().data(), v.data().data() + v.size());
    std::sort(sorted.begin(), sorted.end());
    // Median of the top percentile, by rank (robust to ties).
    const std::size_t first = static_cast<std::size_t>(
        std::floor(0.99 * static_cast<double>(sorted.size())));
    const std::size_t n = sorted.size() - first;
    const double median = sorted[first + n / 2];
    return median > 500.0;
}

Volume extract_patch(const Volume& v, const PatchSpec& p)
{
    p.require_valid(v.dims());
    GridArray<double> out(voxel_count(p.size));
    std::int64_t o = 0;
    for (int z = 0; z < p.size.z(); ++z)
        for (int y = 0; y < p.size.y(); ++y) {
            const std::int64_t row =
                linear_index(p.start.x(), p.start.y() + y, p.start.z() + z, v.dims());
            out.segment(o, p.size.x()) = v.data().segment(row, p.size.x());
            o += p.size.x();
        }
    const Vec3 origin = v.origin() + p.start.cast<double>() * v.spacing();
    return Volume(p.size, v.spacing(), origin, v.kind(), std::move(out));
}

PatchSpec clamp_patch_at(const Index3& center, const Size3& size, const Index3& dims)
{
    if ((size > dims).any())
        throw DomainError("patch size exceeds volume dims");
    if (!in_bounds(center, dims))
        throw DomainError("patch center outside volume");
    Index3 start = center - size / 2;
    start = start.max(Index3(0, 0, 0)).min(dims - size);
    return PatchSpec{start, size};
}

} // namespace vtseg
