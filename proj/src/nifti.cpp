#include "vtseg/nifti.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace vtseg {

namespace {

constexpr std::size_t kHeaderSize = 348;
constexpr float kVoxOffset = 352.0f;

// Little/big-endian scalar access into a raw byte buffer.
template <typename T>
T get_at(const std::uint8_t* p, bool big_endian)
{
    std::array<std::uint8_t, sizeof(T)> raw;
    std::memcpy(raw.data(), p, sizeof(T));
    if (big_endian != (std::endian::native == std::endian::big))
        std::reverse(raw.begin(), raw.end());
    T out;
    std::memcpy(&out, raw.data(), sizeof(T));
    return out;
}

template <typename T>
void put(std::vector<std::uint8_t>& buf, std::size_t offset, T value)
{
    std::memcpy(buf.data() + offset, &value, sizeof(T)); // native = little on all targets here
}

bool supported_datatype(std::int16_t code)
{
    return code == 2 || code == 4 || code == 16;
}

} // namespace

int bitpix_of(NiftiDatatype dt)
{
    switch (dt) {
    case NiftiDatatype::Uint8: return 8;
    case NiftiDatatype::Int16: return 16;
    case NiftiDatatype::Float32: return 32;
    }
    throw FormatError("unsupported datatype code");
}

bool looks_gzipped(const std::vector<std::uint8_t>& bytes)
{
    return bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b;
}

std::vector<std::uint8_t> gzip_compress(const std::vector<std::uint8_t>& bytes)
{
    z_stream zs{};
    // 15+16 selects the gzip wrapper; zlib emits a zero mtime, so output
    // bytes depend only on input bytes.
    if (deflateInit2(&zs, 6, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK)
        throw IoError("deflateInit2 failed");
    std::vector<std::uint8_t> out(deflateBound(&zs, static_cast<uLong>(bytes.size())));
    zs.next_in = const_cast<Bytef*>(bytes.data());
    zs.avail_in = static_cast<uInt>(bytes.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&zs, Z_FINISH);
    deflateEnd(&zs);
    if (rc != Z_STREAM_END)
        throw IoError("gzip compression failed");
    out.resize(out.size() - zs.avail_out);
    return out;
}

std::vector<std::uint8_t> gzip_decompress(const std::vector<std::uint8_t>& bytes,
                                          std::size_t max_output)
{
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 16) != Z_OK)
        throw IoError("inflateInit2 failed");
    std::vector<std::uint8_t> out;
    std::array<std::uint8_t, 1 << 16> chunk;
    zs.next_in = const_cast<Bytef*>(bytes.data());
    zs.avail_in = static_cast<uInt>(bytes.size());
    int rc = Z_OK;
    do {
        zs.next_out = chunk.data();
        zs.avail_out = static_cast<uInt>(chunk.size());
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw FormatError("corrupt gzip stream");
        }
        out.insert(out.end(), chunk.data(), chunk.data() + (chunk.size() - zs.avail_out));
        if (out.size() > max_output) {
            inflateEnd(&zs);
            throw FormatError("gzip payload exceeds size limit");
        }
    } while (rc != Z_STREAM_END && (zs.avail_in > 0 || zs.avail_out == 0));
    inflateEnd(&zs);
    if (rc != Z_STREAM_END)
        throw FormatError("truncated gzip stream");
    return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw IoError("cannot open '" + path + "' for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    if (f.bad())
        throw IoError("read error on '" + path + "'");
    return bytes;
}

void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw IoError("cannot open '" + path + "' for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f)
        throw IoError("write error on '" + path + "'");
}

namespace {

NiftiHeader parse_header(const std::vector<std::uint8_t>& raw)
{
    if (raw.size() < kHeaderSize)
        throw FormatError("file shorter than the 348-byte header");
    const std::uint8_t* p = raw.data();

    // Endianness: dim[0] must land in [1,7] under exactly one byte order.
    bool big = false;
    std::int16_t rank = get_at<std::int16_t>(p + 40, false);
    if (rank < 1 || rank > 7) {
        rank = get_at<std::int16_t>(p + 40, true);
        if (rank < 1 || rank > 7)
            throw FormatError("dim[0] out of range under either byte order");
        big = true;
    }

    NiftiHeader h;
    h.big_endian = big;
    if (get_at<std::int32_t>(p + 0, big) != static_cast<std::int32_t>(kHeaderSize))
        throw FormatError("sizeof_hdr is not 348");

    std::memcpy(h.magic.data(), p + 344, 4);
    if (std::memcmp(h.magic.data(), "n+1\0", 4) != 0) {
        if (std::memcmp(h.magic.data(), "ni1\0", 4) == 0)
            throw FormatError("dual-file NIfTI (ni1) is unsupported");
        throw FormatError("bad magic (expected n+1)");
    }

    for (int i = 0; i < 8; ++i)
        h.dim[i] = get_at<std::int16_t>(p + 40 + 2 * i, big);
    h.datatype = get_at<std::int16_t>(p + 70, big);
    h.bitpix = get_at<std::int16_t>(p + 72, big);
    for (int i = 0; i < 8; ++i)
        h.pixdim[i] = get_at<float>(p + 76 + 4 * i, big);
    h.vox_offset = get_at<float>(p + 108, big);
    h.scl_slope = get_at<float>(p + 112, big);
    h.scl_inter = get_at<float>(p + 116, big);
    h.xyzt_units = static_cast<char>(p[123]);
    std::memcpy(h.descrip.data(), p + 148, 80);
    h.qform_code = get_at<std::int16_t>(p + 252, big);
    h.sform_code = get_at<std::int16_t>(p + 254, big);
    h.quatern_b = get_at<float>(p + 256, big);
    h.quatern_c = get_at<float>(p + 260, big);
    h.quatern_d = get_at<float>(p + 264, big);
    h.qoffset_x = get_at<float>(p + 268, big);
    h.qoffset_y = get_at<float>(p + 272, big);
    h.qoffset_z = get_at<float>(p + 276, big);
    for (int i = 0; i < 4; ++i) {
        h.srow_x[i] = get_at<float>(p + 280 + 4 * i, big);
        h.srow_y[i] = get_at<float>(p + 296 + 4 * i, big);
        h.srow_z[i] = get_at<float>(p + 312 + 4 * i, big);
    }
    std::memcpy(h.intent_name.data(), p + 328, 16);

    if (!supported_datatype(h.datatype))
        throw FormatError("unsupported datatype code " + std::to_string(h.datatype));
    if (h.bitpix != bitpix_of(static_cast<NiftiDatatype>(h.datatype)))
        throw FormatError("bitpix inconsistent with datatype");
    return h;
}

std::vector<std::uint8_t> maybe_decompress(const std::vector<std::uint8_t>& bytes)
{
    return looks_gzipped(bytes) ? gzip_decompress(bytes) : bytes;
}

} // namespace

NiftiHeader read_header(const std::vector<std::uint8_t>& bytes)
{
    return parse_header(maybe_decompress(bytes));
}

NiftiHeader read_header_file(const std::string& path)
{
    return read_header(read_file_bytes(path));
}

NiftiVolume read_volume(const std::vector<std::uint8_t>& bytes, const NiftiReadOptions& opts)
{
    const std::vector<std::uint8_t> raw = maybe_decompress(bytes);
    const NiftiHeader h = parse_header(raw);

    if (h.dim[0] != 3)
        throw FormatError("expected rank-3 volume, got dim[0]=" + std::to_string(h.dim[0]));
    for (int a = 1; a <= 3; ++a) {
        if (h.dim[a] < 1)
            throw FormatError("non-positive dim[" + std::to_string(a) + "]");
        if (!(h.pixdim[a] > 0.0f))
            throw FormatError("non-positive pixdim[" + std::to_string(a) + "]");
    }
    if (!(h.vox_offset >= static_cast<float>(kHeaderSize)) ||
        h.vox_offset != std::floor(h.vox_offset))
        throw FormatError("bad vox_offset");
    const std::uint64_t offset = static_cast<std::uint64_t>(h.vox_offset);

    const Index3 dims = h.volume_dims();
    const std::uint64_t nvox = static_cast<std::uint64_t>(voxel_count(dims));
    const std::uint64_t bpp = static_cast<std::uint64_t>(h.bitpix) / 8;
    if (offset > raw.size() || nvox > (raw.size() - offset) / bpp)
        throw FormatError("truncated payload");

    const std::uint8_t* p = raw.data() + offset;
    const double slope = (h.scl_slope != 0.0f) ? static_cast<double>(h.scl_slope) : 1.0;
    const double inter = (h.scl_slope != 0.0f) ? static_cast<double>(h.scl_inter) : 0.0;

    GridArray<double> data(static_cast<Eigen::Index>(nvox));
    switch (static_cast<NiftiDatatype>(h.datatype)) {
    case NiftiDatatype::Uint8:
        for (std::uint64_t i = 0; i < nvox; ++i)
            data[static_cast<Eigen::Index>(i)] = slope * p[i] + inter;
        break;
    case NiftiDatatype::Int16:
        for (std::uint64_t i = 0; i < nvox; ++i)
            data[static_cast<Eigen::Index>(i)] =
                slope * get_at<std::int16_t>(p + 2 * i, h.big_endian) + inter;
        break;
    case NiftiDatatype::Float32:
        for (std::uint64_t i = 0; i < nvox; ++i)
            data[static_cast<Eigen::Index>(i)] =
                slope * static_cast<double>(get_at<float>(p + 4 * i, h.big_endian)) + inter;
        break;
    }

    VoxelKind kind = opts.kind_hint;
    if (h.datatype == static_cast<std::int16_t>(NiftiDatatype::Uint8)) {
        bool binary = true;
        for (Eigen::Index i = 0; i < data.size() && binary; ++i)
            binary = (data[i] == 0.0 || data[i] == 1.0);
        if (binary)
            kind = VoxelKind::Label;
    }

    try {
        Volume v(dims, h.volume_spacing().cast<double>(),
                 Vec3(h.qoffset_x, h.qoffset_y, h.qoffset_z), kind, std::move(data));
        return NiftiVolume{std::move(v), h};
    } catch (const DomainError& e) {
        throw FormatError(std::string("payload violates ") + to_string(kind) +
                          " constraints: " + e.what());
    }
}

NiftiVolume read_volume_file(const std::string& path, const NiftiReadOptions& opts)
{
    return read_volume(read_file_bytes(path), opts);
}

NiftiDatatype default_datatype(VoxelKind kind)
{
    return kind == VoxelKind::Label ? NiftiDatatype::Uint8 : NiftiDatatype::Float32;
}

std::vector<std::uint8_t> write_volume(const Volume& v, const NiftiWriteOptions& opts)
{
    const NiftiDatatype dt = opts.datatype;
    if (v.kind() == VoxelKind::Label && dt != NiftiDatatype::Uint8)
        throw DomainError("label volumes are written as uint8");
    if (v.kind() == VoxelKind::Probability && dt == NiftiDatatype::Int16)
        throw DomainError("probability volume to int16 would be lossy; use float32");

    const std::int64_t nvox = v.size();
    const std::uint64_t bpp = static_cast<std::uint64_t>(bitpix_of(dt)) / 8;
    std::vector<std::uint8_t> out(static_cast<std::size_t>(352 + bpp * nvox), 0);

    if (dt == NiftiDatatype::Uint8 || dt == NiftiDatatype::Int16) {
        const double lo = (dt == NiftiDatatype::Uint8) ? 0.0 : -32768.0;
        const double hi = (dt == NiftiDatatype::Uint8) ? 255.0 : 32767.0;
        for (std::int64_t i = 0; i < nvox; ++i) {
            const double x = v[i];
            if (x != std::floor(x))
                throw DomainError("non-integer voxel value cannot be written losslessly; "
                                  "use float32");
            if (x < lo || x > hi)
                throw DomainError("voxel value out of range for datatype");
            if (dt == NiftiDatatype::Uint8)
                out[352 + i] = static_cast<std::uint8_t>(x);
            else
                put(out, static_cast<std::size_t>(352 + 2 * i), static_cast<std::int16_t>(x));
        }
    } else {
        for (std::int64_t i = 0; i < nvox; ++i)
            put(out, static_cast<std::size_t>(352 + 4 * i), static_cast<float>(v[i]));
    }

    put<std::int32_t>(out, 0, 348);
    out[38] = 'r';
    put<std::int16_t>(out, 40, 3);
    for (int a = 0; a < 3; ++a)
        put<std::int16_t>(out, 42 + 2 * a, static_cast<std::int16_t>(v.dims()[a]));
    for (int a = 3; a < 7; ++a)
        put<std::int16_t>(out, 42 + 2 * a, 1);
    put<std::int16_t>(out, 70, static_cast<std::int16_t>(dt));
    put<std::int16_t>(out, 72, static_cast<std::int16_t>(bitpix_of(dt)));
    put<float>(out, 76, 1.0f); // pixdim[0] = qfac
    for (int a = 0; a < 3; ++a)
        put<float>(out, 80 + 4 * a, static_cast<float>(v.spacing()[a]));
    put<float>(out, 92, 1.0f);
    put<float>(out, 96, 1.0f);
    put<float>(out, 100, 1.0f);
    put<float>(out, 108, kVoxOffset);
    put<float>(out, 112, 1.0f); // scl_slope
    put<float>(out, 116, 0.0f); // scl_inter

    if (opts.preserve) {
        const NiftiHeader& h = *opts.preserve;
        out[123] = static_cast<std::uint8_t>(h.xyzt_units);
        std::memcpy(out.data() + 148, h.descrip.data(), 80);
        put<std::int16_t>(out, 252, h.qform_code);
        put<std::int16_t>(out, 254, h.sform_code);
        put<float>(out, 256, h.quatern_b);
        put<float>(out, 260, h.quatern_c);
        put<float>(out, 264, h.quatern_d);
        put<float>(out, 268, h.qoffset_x);
        put<float>(out, 272, h.qoffset_y);
        put<float>(out, 276, h.qoffset_z);
        for (int i = 0; i < 4; ++i) {
            put<float>(out, 280 + 4 * i, h.srow_x[i]);
            put<float>(out, 296 + 4 * i, h.srow_y[i]);
            put<float>(out, 312 + 4 * i, h.srow_z[i]);
        }
        std::memcpy(out.data() + 328, h.intent_name.data(), 16);
    } else {
        out[123] = 0x02; // spatial units: mm
        put<std::int16_t>(out, 252, 1); // qform: identity orientation
        for (int a = 0; a < 3; ++a)
            put<float>(out, 268 + 4 * a, static_cast<float>(v.origin()[a]));
    }
    std::memcpy(out.data() + 344, "n+1\0", 4);
    // bytes 348..351 stay zero: no header extensions

    return opts.gzip ? gzip_compress(out) : out;
}

void write_volume_file(const std::string& path, const Volume& v, NiftiWriteOptions opts)
{
    if (path.size() >= 3 && path.compare(path.size() - 3, 3, ".gz") == 0)
        opts.gzip = true;
    write_file_bytes(path, write_volume(v, opts));
}

} // namespace vtseg
