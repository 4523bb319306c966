#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "vff/error.hpp"
#include "vff/io.hpp"

namespace vff {

namespace fs = std::filesystem;

namespace {

constexpr std::array<char, 4> kMagic{'V', 'F', 'F', '1'};

void put_u32(std::vector<unsigned char>& out, std::uint32_t v)
{
    for (int b = 0; b < 4; ++b) {
        out.push_back(static_cast<unsigned char>((v >> (8 * b)) & 0xff));
    }
}

void put_f32(std::vector<unsigned char>& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

std::uint32_t get_u32(const unsigned char* p)
{
    return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
}

float get_f32(const unsigned char* p) { return std::bit_cast<float>(get_u32(p)); }

} // namespace

std::uintmax_t field_file_size(Dims3 dims, int channels, std::size_t n_basis)
{
    const std::uintmax_t values = static_cast<std::uintmax_t>(n_basis) * 3 +
                                  static_cast<std::uintmax_t>(dims.count()) * static_cast<std::uintmax_t>(channels) *
                                      n_basis * 2;
    return kFieldHeaderBytes + 4 * values;
}

void save_field(const FieldGrid& grid, const fs::path& path)
{
    const Dims3 d = grid.dims();
    std::vector<unsigned char> bytes;
    bytes.reserve(static_cast<std::size_t>(field_file_size(d, grid.channels(), grid.n_basis())));
    bytes.insert(bytes.end(), kMagic.begin(), kMagic.end());
    for (std::uint32_t v : {kFieldFileVersion, static_cast<std::uint32_t>(d.t), static_cast<std::uint32_t>(d.h),
                            static_cast<std::uint32_t>(d.w), static_cast<std::uint32_t>(grid.channels()),
                            static_cast<std::uint32_t>(grid.n_basis()),
                            static_cast<std::uint32_t>(grid.bank().dc_index()), std::uint32_t{0}}) {
        put_u32(bytes, v);
    }
    for (const Vec3& w : grid.bank().omegas()) {
        put_f32(bytes, static_cast<float>(w.x));
        put_f32(bytes, static_cast<float>(w.y));
        put_f32(bytes, static_cast<float>(w.t));
    }
    for (float c : grid.coeffs()) {
        put_f32(bytes, c);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot create " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

FieldGrid load_field(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw UnreadableFileError("cannot open " + path.string());
    }
    const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    if (bytes.size() < kMagic.size() || std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
        throw BadMagicError(path.string() + " is not a VFF1 field file");
    }
    if (bytes.size() < kFieldHeaderBytes) {
        throw LengthMismatchError(path.string() + ": truncated header");
    }
    std::array<std::uint32_t, 8> h{};
    for (std::size_t k = 0; k < h.size(); ++k) {
        h[k] = get_u32(bytes.data() + 4 + 4 * k);
    }
    if (h[0] != kFieldFileVersion) {
        throw VersionMismatchError(path.string() + ": version " + std::to_string(h[0]) + ", expected " +
                                   std::to_string(kFieldFileVersion));
    }
    const Dims3 dims{static_cast<int>(h[1]), static_cast<int>(h[2]), static_cast<int>(h[3])};
    const auto channels = static_cast<int>(h[4]);
    const std::size_t n = h[5];
    const std::size_t dc = h[6];
    constexpr std::uint32_t kMaxExtent = 1u << 20;
    for (std::size_t k = 1; k <= 5; ++k) {
        if (h[k] == 0 || h[k] > kMaxExtent) {
            throw FormatError(path.string() + ": header field " + std::to_string(k) + " out of range");
        }
    }
    if (dc >= n) {
        throw FormatError(path.string() + ": dc_index outside the bank");
    }
    const std::uintmax_t expected = field_file_size(dims, channels, n);
    if (bytes.size() != expected) {
        throw LengthMismatchError(path.string() + ": " + std::to_string(bytes.size()) + " bytes, header implies " +
                                  std::to_string(expected));
    }
    const unsigned char* p = bytes.data() + kFieldHeaderBytes;
    std::vector<Vec3> omegas(n);
    for (std::size_t i = 0; i < n; ++i, p += 12) {
        omegas[i] = {get_f32(p), get_f32(p + 4), get_f32(p + 8)};
    }
    std::vector<float> coeffs(dims.count() * static_cast<std::size_t>(channels) * n * 2);
    for (float& c : coeffs) {
        c = get_f32(p);
        p += 4;
    }
    try {
        return FieldGrid(dims, channels, FrequencyBank(std::move(omegas), dc), std::move(coeffs));
    } catch (const ConfigError& e) {
        throw FormatError(path.string() + ": invalid frequency bank: " + e.what());
    }
}

} // namespace vff
