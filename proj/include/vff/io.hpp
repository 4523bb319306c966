#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "vff/field_grid.hpp"
#include "vff/video.hpp"

namespace vff {

/// Frames in `dir` whose file name matches the glob `pattern`, in
/// lexicographic order. 8- or 16-bit; gray and alpha are converted to RGB.
/// Errors: EmptyInputError (no frames), UnreadableFileError,
/// InconsistentDimsError.
VideoBuffer read_png_sequence(const std::filesystem::path& dir, const std::string& pattern = "*.png");

/// Writes frames as 0000.png, 0001.png, ... (at least four digits) with
/// round-half-up quantisation to bit_depth (8 or 16). Creates dir.
void write_png_sequence(const VideoBuffer& video, const std::filesystem::path& dir, int bit_depth = 8);

struct Y4mInfo {
    Dims3 dims;
    int fps_num = 0;
    int fps_den = 1;
    std::string colorspace;
};

/// Parses the stream header only.
Y4mInfo read_y4m_info(const std::filesystem::path& path);

/// Decodes C444 and 4:2:0 streams (C420jpeg, C420, C420paldv, C420mpeg2;
/// chroma upsampled bilinearly) with BT.601 limited-range YCbCr -> RGB.
VideoBuffer read_y4m(const std::filesystem::path& path, Y4mInfo* info = nullptr);

/// Writes an 8-bit C444 stream.
void write_y4m(const VideoBuffer& video, const std::filesystem::path& path, int fps_num = 30, int fps_den = 1);

/// BT.601 limited range, 8-bit codes before rounding.
struct YCbCr {
    double y, cb, cr;
};
YCbCr rgb_to_ycbcr601(double r, double g, double b);
void ycbcr601_to_rgb(double y, double cb, double cr, double& r, double& g, double& b);

/// Field container: "VFF1", eight little-endian u32 (version, T, H, W, C, N,
/// dc_index, reserved), the bank as N x 3 float32, then the coefficient
/// tensor as float32.
inline constexpr std::uint32_t kFieldFileVersion = 1;
inline constexpr std::size_t kFieldHeaderBytes = 4 + 8 * 4;

std::uintmax_t field_file_size(Dims3 dims, int channels, std::size_t n_basis);

void save_field(const FieldGrid& grid, const std::filesystem::path& path);
FieldGrid load_field(const std::filesystem::path& path);

/// Reads a PNG directory or a .y4m file depending on the path.
VideoBuffer read_video(const std::filesystem::path& path);
void write_video(const VideoBuffer& video, const std::filesystem::path& path, int bit_depth = 8);

} // namespace vff
