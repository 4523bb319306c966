#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vff/error.hpp"
#include "vff/io.hpp"

namespace vff {

namespace fs = std::filesystem;

YCbCr rgb_to_ycbcr601(double r, double g, double b)
{
    return {16.0 + 65.481 * r + 128.553 * g + 24.966 * b, 128.0 - 37.797 * r - 74.203 * g + 112.0 * b,
            128.0 + 112.0 * r - 93.786 * g - 18.214 * b};
}

void ycbcr601_to_rgb(double y, double cb, double cr, double& r, double& g, double& b)
{
    static const Eigen::Matrix3d inverse = [] {
        Eigen::Matrix3d m;
        m << 65.481, 128.553, 24.966, -37.797, -74.203, 112.0, 112.0, -93.786, -18.214;
        return Eigen::Matrix3d(m.inverse());
    }();
    const Eigen::Vector3d rgb = inverse * Eigen::Vector3d(y - 16.0, cb - 128.0, cr - 128.0);
    r = rgb(0);
    g = rgb(1);
    b = rgb(2);
}

namespace {

enum class Chroma { c444, c420_centered, c420_cosited };

struct Header {
    Y4mInfo info;
    Chroma chroma = Chroma::c420_centered;
    std::size_t payload_offset = 0;
};

int parse_int(const std::string& token, const char* what)
{
    try {
        std::size_t used = 0;
        const int v = std::stoi(token, &used);
        if (used != token.size()) {
            throw FormatError(std::string("bad ") + what + " '" + token + "'");
        }
        return v;
    } catch (const std::logic_error&) {
        throw FormatError(std::string("bad ") + what + " '" + token + "'");
    }
}

Header parse_header(const std::vector<char>& bytes)
{
    static constexpr std::string_view kMagic = "YUV4MPEG2";
    if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
        throw BadMagicError("missing YUV4MPEG2 signature");
    }
    const auto eol = std::find(bytes.begin(), bytes.end(), '\n');
    if (eol == bytes.end()) {
        throw FormatError("unterminated y4m header");
    }
    Header h;
    h.payload_offset = static_cast<std::size_t>(eol - bytes.begin()) + 1;
    h.info.colorspace = "420jpeg";
    std::istringstream tokens(std::string(bytes.begin() + static_cast<std::ptrdiff_t>(kMagic.size()), eol));
    std::string tok;
    while (tokens >> tok) {
        const char tag = tok[0];
        const std::string value = tok.substr(1);
        switch (tag) {
        case 'W':
            h.info.dims.w = parse_int(value, "width");
            break;
        case 'H':
            h.info.dims.h = parse_int(value, "height");
            break;
        case 'F': {
            const auto colon = value.find(':');
            if (colon == std::string::npos) {
                throw FormatError("bad frame rate '" + value + "'");
            }
            h.info.fps_num = parse_int(value.substr(0, colon), "frame rate");
            h.info.fps_den = parse_int(value.substr(colon + 1), "frame rate");
            break;
        }
        case 'C':
            h.info.colorspace = value;
            break;
        default:
            break; // I, A, X: not needed
        }
    }
    if (h.info.dims.w <= 0 || h.info.dims.h <= 0) {
        throw FormatError("y4m header lacks positive W/H");
    }
    const std::string& cs = h.info.colorspace;
    if (cs == "444") {
        h.chroma = Chroma::c444;
    } else if (cs == "420jpeg" || cs == "420" || cs == "420paldv") {
        h.chroma = Chroma::c420_centered;
    } else if (cs == "420mpeg2") {
        h.chroma = Chroma::c420_cosited;
    } else {
        throw UnknownColorspaceError("unsupported y4m colorspace C" + cs);
    }
    return h;
}

std::vector<char> slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw UnreadableFileError("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Bilinear lookup into a chroma plane of cw x ch at the chroma-grid
/// position of luma sample (x, y).
double chroma_at(const unsigned char* plane, int cw, int chh, int x, int y, Chroma siting)
{
    const double cx = siting == Chroma::c420_cosited ? x / 2.0 : (x + 0.5) / 2.0 - 0.5;
    const double cy = (y + 0.5) / 2.0 - 0.5;
    const double fx = std::clamp(cx, 0.0, cw - 1.0);
    const double fy = std::clamp(cy, 0.0, chh - 1.0);
    const int x0 = static_cast<int>(fx);
    const int y0 = static_cast<int>(fy);
    const int x1 = std::min(x0 + 1, cw - 1);
    const int y1 = std::min(y0 + 1, chh - 1);
    const double ax = fx - x0;
    const double ay = fy - y0;
    const auto px = [&](int xx, int yy) { return static_cast<double>(plane[yy * cw + xx]); };
    return (1 - ay) * ((1 - ax) * px(x0, y0) + ax * px(x1, y0)) + ay * ((1 - ax) * px(x0, y1) + ax * px(x1, y1));
}

} // namespace

Y4mInfo read_y4m_info(const fs::path& path) { return parse_header(slurp(path)).info; }

VideoBuffer read_y4m(const fs::path& path, Y4mInfo* info_out)
{
    const std::vector<char> bytes = slurp(path);
    Header h = parse_header(bytes);
    const int w = h.info.dims.w;
    const int ht = h.info.dims.h;
    const int cw = h.chroma == Chroma::c444 ? w : (w + 1) / 2;
    const int chh = h.chroma == Chroma::c444 ? ht : (ht + 1) / 2;
    const std::size_t luma_size = static_cast<std::size_t>(w) * ht;
    const std::size_t chroma_size = static_cast<std::size_t>(cw) * chh;
    const std::size_t frame_bytes = luma_size + 2 * chroma_size;

    std::vector<std::size_t> frame_offsets;
    std::size_t pos = h.payload_offset;
    static constexpr std::string_view kFrame = "FRAME";
    while (pos < bytes.size()) {
        if (bytes.size() - pos < kFrame.size() ||
            !std::equal(kFrame.begin(), kFrame.end(), bytes.begin() + static_cast<std::ptrdiff_t>(pos))) {
            throw MalformedFrameError("expected FRAME marker at byte " + std::to_string(pos));
        }
        pos += kFrame.size();
        if (pos < bytes.size() && bytes[pos] != '\n' && bytes[pos] != ' ') {
            throw MalformedFrameError("garbage after FRAME marker at byte " + std::to_string(pos));
        }
        const auto eol = std::find(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end(), '\n');
        if (eol == bytes.end()) {
            throw MalformedFrameError("unterminated FRAME header");
        }
        pos = static_cast<std::size_t>(eol - bytes.begin()) + 1;
        if (bytes.size() - pos < frame_bytes) {
            throw TruncatedPayloadError("frame " + std::to_string(frame_offsets.size()) + " has " +
                                        std::to_string(bytes.size() - pos) + " of " + std::to_string(frame_bytes) +
                                        " bytes");
        }
        frame_offsets.push_back(pos);
        pos += frame_bytes;
    }
    if (frame_offsets.empty()) {
        throw StructuralError("y4m stream " + path.string() + " has no frames");
    }
    h.info.dims.t = static_cast<int>(frame_offsets.size());

    VideoBuffer video(h.info.dims, 3);
    for (int t = 0; t < h.info.dims.t; ++t) {
        const auto* base = reinterpret_cast<const unsigned char*>(bytes.data() + frame_offsets[static_cast<std::size_t>(t)]);
        const unsigned char* yp = base;
        const unsigned char* cbp = base + luma_size;
        const unsigned char* crp = cbp + chroma_size;
        for (int y = 0; y < ht; ++y) {
            for (int x = 0; x < w; ++x) {
                double cb, cr;
                if (h.chroma == Chroma::c444) {
                    cb = cbp[y * w + x];
                    cr = crp[y * w + x];
                } else {
                    cb = chroma_at(cbp, cw, chh, x, y, h.chroma);
                    cr = chroma_at(crp, cw, chh, x, y, h.chroma);
                }
                double r, g, b;
                ycbcr601_to_rgb(yp[y * w + x], cb, cr, r, g, b);
                video.at(t, y, x, 0) = std::clamp(r, 0.0, 1.0);
                video.at(t, y, x, 1) = std::clamp(g, 0.0, 1.0);
                video.at(t, y, x, 2) = std::clamp(b, 0.0, 1.0);
            }
        }
    }
    if (info_out) {
        *info_out = h.info;
    }
    return video;
}

void write_y4m(const VideoBuffer& video, const fs::path& path, int fps_num, int fps_den)
{
    if (video.empty() || video.frames() == 0) {
        throw StructuralError("refusing to write an empty video");
    }
    if (video.channels() != 3) {
        throw StructuralError("y4m output needs 3 channels");
    }
    if (fps_num <= 0 || fps_den <= 0) {
        throw ConfigError("frame rate must be positive");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot create " + path.string());
    }
    out << "YUV4MPEG2 W" << video.width() << " H" << video.height() << " F" << fps_num << ':' << fps_den
        << " Ip A1:1 C444\n";
    const std::size_t plane = static_cast<std::size_t>(video.width()) * video.height();
    std::vector<char> frame(3 * plane);
    const auto code = [](double v) { return static_cast<char>(static_cast<unsigned char>(std::clamp(std::floor(v + 0.5), 0.0, 255.0))); };
    for (int t = 0; t < video.frames(); ++t) {
        for (int y = 0; y < video.height(); ++y) {
            for (int x = 0; x < video.width(); ++x) {
                const YCbCr ycc = rgb_to_ycbcr601(std::clamp(video.at(t, y, x, 0), 0.0, 1.0),
                                                  std::clamp(video.at(t, y, x, 1), 0.0, 1.0),
                                                  std::clamp(video.at(t, y, x, 2), 0.0, 1.0));
                const std::size_t p = static_cast<std::size_t>(y) * video.width() + x;
                frame[p] = code(ycc.y);
                frame[plane + p] = code(ycc.cb);
                frame[2 * plane + p] = code(ycc.cr);
            }
        }
        out << "FRAME\n";
        out.write(frame.data(), static_cast<std::streamsize>(frame.size()));
    }
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

} // namespace vff
