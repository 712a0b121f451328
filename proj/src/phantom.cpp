#include "vtseg/phantom.hpp"

#include "vtseg/config.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace vtseg {

namespace {

struct Capsule {
    Vec3 a, b;     // endpoints, voxel-index coordinates
    double radius; // iso-voxel units (index scaled by spacing / min spacing)
};

double uniform(std::mt19937_64& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double segment_distance_sq(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& scale)
{
    const Eigen::Vector3d ps = (p * scale).matrix();
    const Eigen::Vector3d as = (a * scale).matrix();
    const Eigen::Vector3d bs = (b * scale).matrix();
    const Eigen::Vector3d ab = bs - as;
    const double len2 = ab.squaredNorm();
    double t = (len2 > 0.0) ? (ps - as).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (ps - (as + t * ab)).squaredNorm();
}

std::vector<Capsule> build_capsules(const PhantomSpec& spec)
{
    const Vec3 fdims = spec.dims.cast<double>();
    std::mt19937_64 rng(mix_seed(spec.seed, 0x6765u)); // geometry stream
    std::vector<Capsule> caps;

    // Trunk spans the full z extent so every transverse slice cuts it
    // perpendicular to a straight axis (the spherical caps fall outside the
    // grid).
    const double r = spec.trunk_radius;
    const double jitter = 0.08;
    auto lateral = [&](int axis) {
        const double lo = r + 1.0;
        const double hi = fdims[axis] - 2.0 - r;
        const double c = 0.5 * (fdims[axis] - 1.0);
        const double j = jitter * fdims[axis];
        return std::clamp(c + uniform(rng, -j, j), lo, hi);
    };
    const double cx = lateral(0);
    const double cy = lateral(1);
    const Vec3 a(cx, cy, 0.0);
    const Vec3 b(cx, cy, fdims.z() - 1.0);
    caps.push_back(Capsule{a, b, r});

    const double rb = std::max(1.0, r * spec.branch_radius_ratio);
    for (int i = 0; i < spec.branch_count; ++i) {
        const double t = uniform(rng, 0.25, 0.75);
        const Vec3 attach = a + t * (b - a);
        const double azimuth = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        const double polar = uniform(rng, 0.6, 1.2); // radians from the z axis
        const double zsign = (rng() & 1) ? 1.0 : -1.0;
        const Vec3 dir(std::sin(polar) * std::cos(azimuth), std::sin(polar) * std::sin(azimuth),
                       zsign * std::cos(polar));
        double length = uniform(rng, 0.2, 0.35) * fdims.minCoeff();

        // Shrink until the branch capsule stays inside the grid.
        Vec3 end = attach + length * dir;
        const Vec3 lo = Vec3::Constant(rb + 1.0);
        const Vec3 hi = fdims - (rb + 2.0);
        for (int axis = 0; axis < 3; ++axis) {
            if (dir[axis] == 0.0)
                continue;
            const double limit = (dir[axis] > 0.0) ? (hi[axis] - attach[axis]) / dir[axis]
                                                   : (lo[axis] - attach[axis]) / dir[axis];
            length = std::clamp(length, 0.0, std::max(0.0, limit));
        }
        end = attach + length * dir;
        caps.push_back(Capsule{attach, end, rb});
    }
    return caps;
}

} // namespace

void PhantomSpec::validate() const
{
    if ((dims < 8).any())
        throw DomainError("phantom dims must be at least 8 per axis");
    if ((spacing <= 0.0).any())
        throw DomainError("phantom spacing must be positive");
    if (trunk_radius < 1.0)
        throw DomainError("trunk_radius must be >= 1 voxel");
    if (2.0 * (trunk_radius + 2.0) >= std::min(dims.x(), dims.y()))
        throw DomainError("tube does not fit inside dims");
    if (branch_count < 0)
        throw DomainError("branch_count must be >= 0");
    if (!(branch_radius_ratio > 0.0 && branch_radius_ratio <= 1.0))
        throw DomainError("branch_radius_ratio must be in (0, 1]");
    if (lumen_hu == background_hu)
        throw DomainError("lumen_hu must differ from background_hu");
    if (noise_sd < 0.0)
        throw DomainError("noise_sd must be >= 0");
}

PhantomPair generate(const PhantomSpec& spec)
{
    spec.validate();
    const std::vector<Capsule> caps = build_capsules(spec);
    const Index3 dims = spec.dims;
    const Vec3 scale = spec.spacing / spec.spacing.minCoeff();

    GridArray<double> mask = GridArray<double>::Zero(voxel_count(dims));
    std::int64_t i = 0;
    for (int z = 0; z < dims.z(); ++z)
        for (int y = 0; y < dims.y(); ++y)
            for (int x = 0; x < dims.x(); ++x, ++i) {
                const Vec3 p(x, y, z);
                for (const Capsule& c : caps)
                    if (segment_distance_sq(p, c.a, c.b, scale) <= c.radius * c.radius) {
                        mask[i] = 1.0;
                        break;
                    }
            }

    const double offset = (spec.source_style == SourceTag::K || spec.source_style == SourceTag::R)
                              ? 1024.0
                              : 0.0;
    GridArray<double> hu(mask.size());
    if (spec.noise_sd > 0.0) {
        std::mt19937_64 rng(mix_seed(spec.seed, 0x6e6fu)); // noise stream
        std::normal_distribution<double> noise(0.0, spec.noise_sd);
        for (Eigen::Index v = 0; v < mask.size(); ++v)
            hu[v] = (mask[v] != 0.0 ? spec.lumen_hu : spec.background_hu) + noise(rng) + offset;
    } else {
        hu = (mask != 0.0).select(GridArray<double>::Constant(mask.size(), spec.lumen_hu + offset),
                                  GridArray<double>::Constant(mask.size(),
                                                              spec.background_hu + offset));
    }

    const Vec3 origin(0, 0, 0);
    return PhantomPair{Volume(dims, spec.spacing, origin, VoxelKind::HU, std::move(hu)),
                       Volume(dims, spec.spacing, origin, VoxelKind::Label, std::move(mask))};
}

std::vector<Vec3> axis_points(const PhantomSpec& spec)
{
    spec.validate();
    std::vector<Vec3> pts;
    for (const Capsule& c : build_capsules(spec)) {
        pts.push_back(c.a);
        pts.push_back(c.b);
    }
    return pts;
}

PhantomSpec phantom_spec_from_text(const std::string& text)
{
    PhantomSpec spec;
    for (const auto& [key, value] : parse_kv_text(text)) {
        if (key == "dims")
            spec.dims = parse_int3(key, value);
        else if (key == "spacing")
            spec.spacing = parse_double3(key, value);
        else if (key == "seed")
            spec.seed = parse_uint(key, value);
        else if (key == "trunk_radius")
            spec.trunk_radius = parse_double(key, value);
        else if (key == "branch_count")
            spec.branch_count = static_cast<int>(parse_int(key, value));
        else if (key == "branch_radius_ratio")
            spec.branch_radius_ratio = parse_double(key, value);
        else if (key == "lumen_hu")
            spec.lumen_hu = parse_double(key, value);
        else if (key == "background_hu")
            spec.background_hu = parse_double(key, value);
        else if (key == "noise_sd")
            spec.noise_sd = parse_double(key, value);
        else if (key == "source_style")
            spec.source_style = source_tag_from_string(value);
        else
            throw ConfigError("unknown phantom key '" + key + "'");
    }
    return spec;
}

std::string phantom_spec_to_text(const PhantomSpec& spec)
{
    std::ostringstream os;
    os << "dims = " << format_int3(spec.dims) << "\n";
    os << "spacing = " << format_double3(spec.spacing) << "\n";
    os << "seed = " << spec.seed << "\n";
    os << "trunk_radius = " << format_double(spec.trunk_radius) << "\n";
    os << "branch_count = " << spec.branch_count << "\n";
    os << "branch_radius_ratio = " << format_double(spec.branch_radius_ratio) << "\n";
    os << "lumen_hu = " << format_double(spec.lumen_hu) << "\n";
    os << "background_hu = " << format_double(spec.background_hu) << "\n";
    os << "noise_sd = " << format_double(spec.noise_sd) << "\n";
    os << "source_style = " << to_string(spec.source_style) << "\n";
    return os.str();
}

} // namespace vtseg
