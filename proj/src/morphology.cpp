#include "vtseg/morphology.hpp"

#include <array>
#include <numeric>

namespace vtseg {

namespace {

// Union-find over provisional labels.
class UnionFind {
public:
    std::int32_t make()
    {
        parent_.push_back(static_cast<std::int32_t>(parent_.size()));
        return parent_.back();
    }
    std::int32_t find(std::int32_t a)
    {
        while (parent_[a] != a) {
            parent_[a] = parent_[parent_[a]];
            a = parent_[a];
        }
        return a;
    }
    void unite(std::int32_t a, std::int32_t b)
    {
        a = find(a);
        b = find(b);
        if (a != b)
            parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::int32_t> parent_;
};

void require_mask(const Volume& m)
{
    if (m.kind() != VoxelKind::Label)
        throw DomainError("expected a label volume");
}

// Previously-scanned neighbor offsets (strictly preceding in linear order).
std::vector<Index3> prior_offsets_3d(int connectivity)
{
    if (connectivity != 6 && connectivity != 26)
        throw DomainError("3D connectivity must be 6 or 26");
    std::vector<Index3> offs;
    for (int dz = -1; dz <= 0; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                if (dz == 0 && (dy > 0 || (dy == 0 && dx >= 0)))
                    continue;
                const int manhattan = std::abs(dx) + std::abs(dy) + std::abs(dz);
                if (connectivity == 6 && manhattan != 1)
                    continue;
                offs.emplace_back(dx, dy, dz);
            }
    return offs;
}

std::vector<Eigen::Array2i> prior_offsets_2d(int connectivity)
{
    if (connectivity != 4 && connectivity != 8)
        throw DomainError("2D connectivity must be 4 or 8");
    std::vector<Eigen::Array2i> offs;
    for (int dv = -1; dv <= 0; ++dv)
        for (int du = -1; du <= 1; ++du) {
            if (dv == 0 && du >= 0)
                continue;
            if (connectivity == 4 && std::abs(du) + std::abs(dv) != 1)
                continue;
            offs.emplace_back(du, dv);
        }
    return offs;
}

// Second pass shared by 2D and 3D: collapse union-find roots to dense labels
// ordered by first encounter, and tally sizes.
template <typename LabelArray>
int densify(LabelArray& labels, UnionFind& uf, std::vector<std::int64_t>& sizes)
{
    std::vector<std::int32_t> dense_of; // root -> dense label (0 = unseen)
    int count = 0;
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) {
            labels[i] = 0; // background
            continue;
        }
        const std::int32_t root = uf.find(labels[i]);
        if (static_cast<std::size_t>(root) >= dense_of.size())
            dense_of.resize(root + 1, 0);
        if (dense_of[root] == 0)
            dense_of[root] = ++count;
        labels[i] = dense_of[root];
        if (static_cast<std::size_t>(labels[i]) > sizes.size())
            sizes.resize(labels[i], 0);
        ++sizes[labels[i] - 1];
    }
    return count;
}

} // namespace

ComponentLabeling label_components_3d(const Volume& mask, int connectivity)
{
    require_mask(mask);
    const Index3 dims = mask.dims();
    const auto offs = prior_offsets_3d(connectivity);

    ComponentLabeling out;
    out.dims = dims;
    out.spacing = mask.spacing();
    out.origin = mask.origin();
    out.connectivity = connectivity;
    out.labels = GridArray<std::int32_t>::Constant(mask.size(), -1);

    UnionFind uf;
    std::int64_t i = 0;
    for (int z = 0; z < dims.z(); ++z)
        for (int y = 0; y < dims.y(); ++y)
            for (int x = 0; x < dims.x(); ++x, ++i) {
                if (mask[i] == 0.0)
                    continue;
                std::int32_t lab = -1;
                for (const auto& d : offs) {
                    const Index3 q(x + d.x(), y + d.y(), z + d.z());
                    if (!in_bounds(q, dims))
                        continue;
                    const std::int32_t ql = out.labels[linear_index(q, dims)];
                    if (ql < 0)
                        continue;
                    if (lab < 0)
                        lab = ql;
                    else
                        uf.unite(lab, ql);
                }
                out.labels[i] = (lab >= 0) ? lab : uf.make();
            }
    out.count = densify(out.labels, uf, out.sizes);
    return out;
}

ComponentLabeling2D label_components_2d(const SliceMask& slice, int connectivity)
{
    const auto offs = prior_offsets_2d(connectivity);
    ComponentLabeling2D out;
    out.dims = slice.dims;
    out.connectivity = connectivity;
    out.labels = GridArray<std::int32_t>::Constant(slice.values.size(), -1);

    UnionFind uf;
    std::int64_t i = 0;
    for (int v = 0; v < slice.dims.y(); ++v)
        for (int u = 0; u < slice.dims.x(); ++u, ++i) {
            if (slice.values[i] == 0)
                continue;
            std::int32_t lab = -1;
            for (const auto& d : offs) {
                const int uu = u + d.x();
                const int vv = v + d.y();
                if (uu < 0 || vv < 0 || uu >= slice.dims.x() || vv >= slice.dims.y())
                    continue;
                const std::int32_t ql = out.labels[slice.index(uu, vv)];
                if (ql < 0)
                    continue;
                if (lab < 0)
                    lab = ql;
                else
                    uf.unite(lab, ql);
            }
            out.labels[i] = (lab >= 0) ? lab : uf.make();
        }
    out.count = densify(out.labels, uf, out.sizes);
    return out;
}

Vec3 centroid(const ComponentLabeling& c, int label)
{
    if (label < 1 || label > c.count)
        throw DomainError("unknown component label");
    Vec3 sum(0, 0, 0);
    std::int64_t n = 0;
    std::int64_t i = 0;
    for (int z = 0; z < c.dims.z(); ++z)
        for (int y = 0; y < c.dims.y(); ++y)
            for (int x = 0; x < c.dims.x(); ++x, ++i)
                if (c.labels[i] == label) {
                    sum += Vec3(x, y, z);
                    ++n;
                }
    return sum / static_cast<double>(n);
}

Eigen::Array2d centroid(const ComponentLabeling2D& c, int label)
{
    if (label < 1 || label > c.count)
        throw DomainError("unknown component label");
    return centroids(c)[label - 1];
}

std::vector<Eigen::Array2d> centroids(const ComponentLabeling2D& c)
{
    std::vector<Eigen::Array2d> sum(c.count, Eigen::Array2d(0, 0));
    std::int64_t i = 0;
    for (int v = 0; v < c.dims.y(); ++v)
        for (int u = 0; u < c.dims.x(); ++u, ++i)
            if (c.labels[i] > 0)
                sum[c.labels[i] - 1] += Eigen::Array2d(u, v);
    for (int k = 0; k < c.count; ++k)
        sum[k] /= static_cast<double>(c.sizes[k]);
    return sum;
}

Volume filter_components(const ComponentLabeling& c, std::int64_t min_size)
{
    if (min_size < 0)
        throw DomainError("min_size must be >= 0");
    GridArray<double> out = GridArray<double>::Zero(c.labels.size());
    for (Eigen::Index i = 0; i < c.labels.size(); ++i)
        if (c.labels[i] > 0 && c.sizes[c.labels[i] - 1] >= min_size)
            out[i] = 1.0;
    return Volume(c.dims, c.spacing, c.origin, VoxelKind::Label, std::move(out));
}

std::vector<Index3> boundary_voxels(const Volume& mask)
{
    require_mask(mask);
    const Index3 dims = mask.dims();
    static const std::array<Index3, 6> nbr = {Index3(-1, 0, 0), Index3(1, 0, 0),
                                              Index3(0, -1, 0), Index3(0, 1, 0),
                                              Index3(0, 0, -1), Index3(0, 0, 1)};
    std::vector<Index3> out;
    std::int64_t i = 0;
    for (int z = 0; z < dims.z(); ++z)
        for (int y = 0; y < dims.y(); ++y)
            for (int x = 0; x < dims.x(); ++x, ++i) {
                if (mask[i] == 0.0)
                    continue;
                for (const auto& d : nbr) {
                    const Index3 q(x + d.x(), y + d.y(), z + d.z());
                    if (!in_bounds(q, dims) || mask[linear_index(q, dims)] == 0.0) {
                        out.emplace_back(x, y, z);
                        break;
                    }
                }
            }
    return out;
}

} // namespace vtseg
