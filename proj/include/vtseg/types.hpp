#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace vtseg {

// Voxel index / size triples and physical (mm) triples.
using Index3 = Eigen::Array3i;
using Size3 = Eigen::Array3i;
using Vec3 = Eigen::Array3d;

// Flat voxel grid storage, x-fastest linear order.
template <typename Scalar>
using GridArray = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Contract violation on an in-memory input (bad patch bounds, bad threshold, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Malformed external data (file format, config syntax).
class FormatError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Evaluation input mismatch (case lists, dims).
class EvalError : public Error {
public:
    using Error::Error;
};

inline std::int64_t voxel_count(const Index3& dims)
{
    return static_cast<std::int64_t>(dims.x()) * dims.y() * dims.z();
}

// Linear index with x fastest, then y, then z.
inline std::int64_t linear_index(int x, int y, int z, const Index3& dims)
{
    return x + static_cast<std::int64_t>(dims.x()) * (y + static_cast<std::int64_t>(dims.y()) * z);
}

inline std::int64_t linear_index(const Index3& p, const Index3& dims)
{
    return linear_index(p.x(), p.y(), p.z(), dims);
}

inline Index3 delinearize(std::int64_t i, const Index3& dims)
{
    const int x = static_cast<int>(i % dims.x());
    const int y = static_cast<int>((i / dims.x()) % dims.y());
    const int z = static_cast<int>(i / (static_cast<std::int64_t>(dims.x()) * dims.y()));
    return Index3(x, y, z);
}

inline bool in_bounds(const Index3& p, const Index3& dims)
{
    return (p >= 0).all() && (p < dims).all();
}

// splitmix64, used wherever a seed has to be mixed with coordinates.
inline std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0)
{
    std::uint64_t h = mix_seed(seed);
    h = mix_seed(h ^ a);
    h = mix_seed(h ^ b);
    h = mix_seed(h ^ c);
    return h;
}

} // namespace vtseg
