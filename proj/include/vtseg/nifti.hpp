#pragma once

#include "vtseg/volume.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace vtseg {

// NIfTI-1 datatype codes supported by this reader/writer.
enum class NiftiDatatype : std::int16_t {
    Uint8 = 2,
    Int16 = 4,
    Float32 = 16,
};

int bitpix_of(NiftiDatatype dt);

// Parsed single-file NIfTI-1 header. Orientation fields (qform/sform) are
// carried verbatim so a round-trip preserves them; the pipeline itself works
// in voxel space and never interprets them.
struct NiftiHeader {
    std::array<std::int16_t, 8> dim{};    // dim[0] = rank
    std::int16_t datatype = 0;
    std::int16_t bitpix = 0;
    std::array<float, 8> pixdim{};
    float vox_offset = 352.0f;
    float scl_slope = 1.0f;
    float scl_inter = 0.0f;
    std::int16_t qform_code = 0;
    std::int16_t sform_code = 0;
    float quatern_b = 0, quatern_c = 0, quatern_d = 0;
    float qoffset_x = 0, qoffset_y = 0, qoffset_z = 0;
    std::array<float, 4> srow_x{}, srow_y{}, srow_z{};
    std::array<char, 80> descrip{};
    std::array<char, 16> intent_name{};
    char xyzt_units = 0;
    std::array<char, 4> magic{};          // "n+1\0" for single-file
    bool big_endian = false;              // byte order the file was stored in

    Index3 volume_dims() const { return Index3(dim[1], dim[2], dim[3]); }
    Vec3 volume_spacing() const { return Vec3(pixdim[1], pixdim[2], pixdim[3]); }
};

struct NiftiReadOptions {
    // Kind assigned when the data is not a {0,1}-valued uint8 mask.
    VoxelKind kind_hint = VoxelKind::HU;
};

struct NiftiWriteOptions {
    NiftiDatatype datatype = NiftiDatatype::Float32;
    // When set, orientation and description fields are copied from this
    // header so read -> write round-trips preserve them.
    const NiftiHeader* preserve = nullptr;
    bool gzip = false;
};

struct NiftiVolume {
    Volume volume;
    NiftiHeader header;
};

// In-memory parse. Accepts a raw or gzip-compressed (0x1f 0x8b) single-file
// NIfTI-1 payload. All failures throw FormatError; no malformed input may
// fault.
NiftiVolume read_volume(const std::vector<std::uint8_t>& bytes,
                        const NiftiReadOptions& opts = {});
NiftiVolume read_volume_file(const std::string& path, const NiftiReadOptions& opts = {});

// Header-only parse (no payload decode beyond the first 352 bytes).
NiftiHeader read_header(const std::vector<std::uint8_t>& bytes);
NiftiHeader read_header_file(const std::string& path);

std::vector<std::uint8_t> write_volume(const Volume& v, const NiftiWriteOptions& opts = {});
// gzip is inferred from a ".gz" suffix unless opts.gzip is already set.
void write_volume_file(const std::string& path, const Volume& v, NiftiWriteOptions opts = {});

// Default on-disk datatype per intensity kind: Label -> uint8, everything
// else -> float32.
NiftiDatatype default_datatype(VoxelKind kind);

// gzip envelope helpers (deterministic output: zero mtime).
bool looks_gzipped(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> gzip_compress(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> gzip_decompress(const std::vector<std::uint8_t>& bytes,
                                          std::size_t max_output = std::size_t(1) << 30);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes);

} // namespace vtseg
