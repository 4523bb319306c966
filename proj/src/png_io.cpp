#include <png.h>

#include <algorithm>
#include <cmath>
#include <cerrno>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fnmatch.h>
#include <memory>
#include <string>
#include <vector>

#include "vff/error.hpp"
#include "vff/io.hpp"

namespace vff {

namespace fs = std::filesystem;

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct PngErrorSink {
    char message[256] = "libpng error";
};

void on_png_error(png_structp png, png_const_charp msg)
{
    auto* sink = static_cast<PngErrorSink*>(png_get_error_ptr(png));
    std::snprintf(sink->message, sizeof(sink->message), "%s", msg);
    png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

struct DecodedPng {
    int width = 0;
    int height = 0;
    int bit_depth = 8;
    std::vector<png_byte> bytes; // RGB rows, 16-bit samples big-endian
};

// No objects with destructors may be created between setjmp and a possible
// longjmp in these helpers; buffers are sized and owned by the caller.
bool png_read_header(png_structp png, png_infop info, PngErrorSink&, int& w, int& h, int& depth, std::size_t& rowbytes)
{
    if (setjmp(png_jmpbuf(png))) {
        return false;
    }
    png_read_info(png, info);
    png_set_expand(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);
    w = static_cast<int>(png_get_image_width(png, info));
    h = static_cast<int>(png_get_image_height(png, info));
    depth = png_get_bit_depth(png, info);
    rowbytes = png_get_rowbytes(png, info);
    return true;
}

bool png_read_pixels(png_structp png, png_infop info, png_bytepp rows)
{
    if (setjmp(png_jmpbuf(png))) {
        return false;
    }
    png_read_image(png, rows);
    png_read_end(png, info);
    return true;
}

DecodedPng decode_png(const fs::path& path)
{
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) {
        throw UnreadableFileError("cannot open " + path.string());
    }
    png_byte signature[8] = {};
    if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
        throw UnreadableFileError(path.string() + " is not a PNG file");
    }
    PngErrorSink sink;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &sink, on_png_error, on_png_warning);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw UnreadableFileError("libpng initialisation failed for " + path.string());
    }
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);

    DecodedPng out;
    std::size_t rowbytes = 0;
    if (!png_read_header(png, info, sink, out.width, out.height, out.bit_depth, rowbytes)) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw UnreadableFileError(path.string() + ": " + sink.message);
    }
    const std::size_t expected = static_cast<std::size_t>(out.width) * 3 * (out.bit_depth == 16 ? 2 : 1);
    if (rowbytes != expected || (out.bit_depth != 8 && out.bit_depth != 16)) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw UnreadableFileError(path.string() + ": unsupported pixel layout");
    }
    out.bytes.resize(rowbytes * static_cast<std::size_t>(out.height));
    std::vector<png_bytep> rows(static_cast<std::size_t>(out.height));
    for (int y = 0; y < out.height; ++y) {
        rows[static_cast<std::size_t>(y)] = out.bytes.data() + rowbytes * static_cast<std::size_t>(y);
    }
    const bool ok = png_read_pixels(png, info, rows.data());
    png_destroy_read_struct(&png, &info, nullptr);
    if (!ok) {
        throw UnreadableFileError(path.string() + ": " + sink.message);
    }
    return out;
}

bool png_write_all(png_structp png, png_infop info, int w, int h, int depth, png_bytepp rows)
{
    if (setjmp(png_jmpbuf(png))) {
        return false;
    }
    png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), depth, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows);
    png_write_end(png, info);
    return true;
}

void encode_png(const fs::path& path, const VideoBuffer& video, int t, int bit_depth)
{
    const int w = video.width();
    const int h = video.height();
    const std::size_t bytes_per_sample = bit_depth == 16 ? 2 : 1;
    const std::size_t rowbytes = static_cast<std::size_t>(w) * 3 * bytes_per_sample;
    const double max_code = bit_depth == 16 ? 65535.0 : 255.0;
    std::vector<png_byte> pixels(rowbytes * static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                const double v = std::clamp(video.at(t, y, x, video.channels() == 1 ? 0 : c), 0.0, 1.0);
                const auto code = static_cast<unsigned>(std::floor(v * max_code + 0.5));
                png_byte* dst = pixels.data() + rowbytes * static_cast<std::size_t>(y) +
                                (static_cast<std::size_t>(x) * 3 + static_cast<std::size_t>(c)) * bytes_per_sample;
                if (bit_depth == 16) {
                    dst[0] = static_cast<png_byte>(code >> 8);
                    dst[1] = static_cast<png_byte>(code & 0xff);
                } else {
                    dst[0] = static_cast<png_byte>(code);
                }
            }
        }
    }
    std::vector<png_bytep> rows(static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y) {
        rows[static_cast<std::size_t>(y)] = pixels.data() + rowbytes * static_cast<std::size_t>(y);
    }

    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) {
        throw IoError("cannot create " + path.string() + ": " + std::strerror(errno));
    }
    PngErrorSink sink;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &sink, on_png_error, on_png_warning);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng initialisation failed for " + path.string());
    }
    png_init_io(png, file.get());
    const bool ok = png_write_all(png, info, w, h, bit_depth, rows.data());
    png_destroy_write_struct(&png, &info);
    if (!ok) {
        throw IoError(path.string() + ": " + sink.message);
    }
    if (std::fflush(file.get()) != 0) {
        throw IoError("write failed for " + path.string());
    }
}

} // namespace

VideoBuffer read_png_sequence(const fs::path& dir, const std::string& pattern)
{
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) {
        throw UnreadableFileError(dir.string() + " is not a directory");
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (entry.is_regular_file() && fnmatch(pattern.c_str(), entry.path().filename().c_str(), 0) == 0) {
            files.push_back(entry.path());
        }
    }
    if (ec) {
        throw UnreadableFileError("cannot list " + dir.string() + ": " + ec.message());
    }
    if (files.empty()) {
        throw EmptyInputError("no frames matching '" + pattern + "' in " + dir.string());
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });

    VideoBuffer video;
    for (std::size_t t = 0; t < files.size(); ++t) {
        const DecodedPng img = decode_png(files[t]);
        if (t == 0) {
            video = VideoBuffer({static_cast<int>(files.size()), img.height, img.width}, 3);
        } else if (img.width != video.width() || img.height != video.height()) {
            throw InconsistentDimsError(files[t].string() + " is " + std::to_string(img.width) + "x" +
                                        std::to_string(img.height) + ", expected " + std::to_string(video.width()) +
                                        "x" + std::to_string(video.height()));
        }
        const double max_code = img.bit_depth == 16 ? 65535.0 : 255.0;
        auto frame = video.frame(static_cast<int>(t));
        for (std::size_t k = 0; k < frame.size(); ++k) {
            const unsigned code = img.bit_depth == 16 ? (unsigned{img.bytes[2 * k]} << 8) | img.bytes[2 * k + 1]
                                                      : unsigned{img.bytes[k]};
            frame[k] = code / max_code;
        }
    }
    return video;
}

void write_png_sequence(const VideoBuffer& video, const fs::path& dir, int bit_depth)
{
    if (video.empty() || video.frames() == 0) {
        throw StructuralError("refusing to write an empty video");
    }
    if (bit_depth != 8 && bit_depth != 16) {
        throw ConfigError("png bit depth must be 8 or 16");
    }
    if (video.channels() != 3 && video.channels() != 1) {
        throw StructuralError("png output needs 1 or 3 channels");
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
    }
    const int digits = std::max(4, static_cast<int>(std::to_string(video.frames() - 1).size()));
    for (int t = 0; t < video.frames(); ++t) {
        std::string name = std::to_string(t);
        name.insert(0, static_cast<std::size_t>(digits) - name.size(), '0');
        encode_png(dir / (name + ".png"), video, t, bit_depth);
    }
}

VideoBuffer read_video(const fs::path& path)
{
    if (path.extension() == ".y4m") {
        return read_y4m(path);
    }
    return read_png_sequence(path);
}

void write_video(const VideoBuffer& video, const fs::path& path, int bit_depth)
{
    if (path.extension() == ".y4m") {
        write_y4m(video, path);
        return;
    }
    write_png_sequence(video, path, bit_depth);
}

} // namespace vff
