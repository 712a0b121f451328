#include "vtseg/centerline.hpp"

#include "vtseg/morphology.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace vtseg {

namespace {

struct Index3Hash {
    std::size_t operator()(const Index3& p) const
    {
        return static_cast<std::size_t>(
            mix_seed(0x5eedULL, static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.x())),
                     static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.y())),
                     static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.z()))));
    }
};
struct Index3Eq {
    bool operator()(const Index3& a, const Index3& b) const { return (a == b).all(); }
};

// Axis sweeps: slice normal k maps slice-plane coordinates (u, v) to the
// remaining two axes in ascending axis order.
//   z slices: (u, v) = (x, y);  y slices: (u, v) = (x, z);  x slices: (u, v) = (y, z)
Index3 lift(int axis, int slice, int u, int v)
{
    switch (axis) {
    case 2: return Index3(u, v, slice);
    case 1: return Index3(u, slice, v);
    default: return Index3(slice, u, v);
    }
}

SliceMask take_slice(const Volume& mask, int axis, int slice)
{
    const Index3 dims = mask.dims();
    int nu = 0, nv = 0;
    switch (axis) {
    case 2: nu = dims.x(); nv = dims.y(); break;
    case 1: nu = dims.x(); nv = dims.z(); break;
    default: nu = dims.y(); nv = dims.z(); break;
    }
    SliceMask s;
    s.dims = Eigen::Array2i(nu, nv);
    s.values = GridArray<std::uint8_t>::Zero(static_cast<std::int64_t>(nu) * nv);
    for (int v = 0; v < nv; ++v)
        for (int u = 0; u < nu; ++u)
            if (mask.at(lift(axis, slice, u, v)) != 0.0)
                s.values[s.index(u, v)] = 1;
    return s;
}

bool near_foreground(const Volume& mask, const Index3& p)
{
    for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const Index3 q(p.x() + dx, p.y() + dy, p.z() + dz);
                if (in_bounds(q, mask.dims()) && mask.at(q) != 0.0)
                    return true;
            }
    return false;
}

} // namespace

CenterSet pseudo_centerline(const Volume& coarse_mask, int connectivity2d)
{
    if (coarse_mask.kind() != VoxelKind::Label)
        throw DomainError("pseudo_centerline expects a label volume");
    if ((coarse_mask.data() != 0.0).count() == 0)
        throw DomainError("pseudo_centerline requires a nonempty mask");

    CenterSet out;
    std::unordered_set<Index3, Index3Hash, Index3Eq> seen;
    const Index3 dims = coarse_mask.dims();
    for (int axis : {2, 1, 0}) {
        const int nslices = dims[axis];
        for (int slice = 0; slice < nslices; ++slice) {
            const SliceMask s = take_slice(coarse_mask, axis, slice);
            if ((s.values != 0).count() == 0)
                continue;
            const ComponentLabeling2D labeling = label_components_2d(s, connectivity2d);
            for (const Eigen::Array2d& c : centroids(labeling)) {
                const Index3 p = lift(axis, slice, static_cast<int>(std::lround(c.x())),
                                      static_cast<int>(std::lround(c.y())));
                if (!in_bounds(p, dims) || !near_foreground(coarse_mask, p))
                    continue; // off-vessel rounding artifact
                if (seen.insert(p).second)
                    out.points.push_back(p);
            }
        }
    }
    out.d_min = 0;
    return out;
}

CenterSet sparsify(const CenterSet& dense, int d_min)
{
    if (d_min < 0)
        throw DomainError("d_min must be >= 0");
    if (d_min == 0)
        return dense;
    CenterSet out;
    out.d_min = d_min;
    const std::int64_t d2 = static_cast<std::int64_t>(d_min) * d_min;
    for (const Index3& p : dense.points) {
        bool keep = true;
        for (const Index3& q : out.points) {
            const Eigen::Array3<std::int64_t> d = (p - q).cast<std::int64_t>();
            if ((d * d).sum() < d2) {
                keep = false;
                break;
            }
        }
        if (keep)
            out.points.push_back(p);
    }
    return out;
}

CoverageReport coverage_check(const CenterSet& centers, const Volume& mask,
                              const Size3& fine_patch)
{
    if (mask.kind() != VoxelKind::Label)
        throw DomainError("coverage_check expects a label volume");
    const Index3 dims = mask.dims();
    GridArray<std::uint8_t> covered = GridArray<std::uint8_t>::Zero(mask.size());
    for (const Index3& c : centers.points) {
        // Footprint: within fine_patch/2 (Chebyshev, per axis) of the
        // border-clamped patch center, cropped to the volume.
        const PatchSpec p = clamp_patch_at(c, fine_patch, dims);
        const Index3 lo = p.start;
        const Index3 hi = (p.start + p.size).min(dims - 1); // inclusive
        for (int z = lo.z(); z <= hi.z(); ++z)
            for (int y = lo.y(); y <= hi.y(); ++y) {
                const std::int64_t row = linear_index(lo.x(), y, z, dims);
                covered.segment(row, hi.x() - lo.x() + 1).setConstant(1);
            }
    }
    CoverageReport report;
    std::int64_t i = 0;
    for (int z = 0; z < dims.z(); ++z)
        for (int y = 0; y < dims.y(); ++y)
            for (int x = 0; x < dims.x(); ++x, ++i)
                if (mask[i] != 0.0) {
                    ++report.foreground;
                    if (!covered[i])
                        report.uncovered.emplace_back(x, y, z);
                }
    return report;
}

std::string centers_to_text(const CenterSet& centers)
{
    std::ostringstream os;
    for (const Index3& p : centers.points)
        os << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
    return os.str();
}

CenterSet centers_from_text(const std::string& text)
{
    CenterSet out;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty())
            continue;
        std::istringstream ls(line);
        Index3 p;
        if (!(ls >> p.x() >> p.y() >> p.z()))
            throw FormatError("centers file: bad triple at line " + std::to_string(lineno));
        std::string extra;
        if (ls >> extra)
            throw FormatError("centers file: trailing tokens at line " + std::to_string(lineno));
        out.points.push_back(p);
    }
    return out;
}

void write_centers_file(const std::string& path, const CenterSet& centers)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw IoError("cannot open '" + path + "' for writing");
    f << centers_to_text(centers);
    if (!f)
        throw IoError("write error on '" + path + "'");
}

CenterSet read_centers_file(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw IoError("cannot open '" + path + "' for reading");
    std::stringstream ss;
    ss << f.rdbuf();
    return centers_from_text(ss.str());
}

} // namespace vtseg
