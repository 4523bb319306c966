#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vff/geometry.hpp"

namespace vff {

/// Dense T x H x W x C video, frame-major then row-major with interleaved
/// channels. Nominal range is [0, 1]; intermediate results (e.g. raw field
/// samples) may leave it, and the file writers clamp.
class VideoBuffer {
public:
    VideoBuffer() = default;
    VideoBuffer(Dims3 dims, int channels = 3, double fill = 0.0);
    /// Throws StructuralError if data.size() != T*H*W*C.
    VideoBuffer(Dims3 dims, int channels, std::vector<double> data);

    Dims3 dims() const { return dims_; }
    int frames() const { return dims_.t; }
    int height() const { return dims_.h; }
    int width() const { return dims_.w; }
    int channels() const { return channels_; }
    bool empty() const { return data_.empty(); }

    double& at(int t, int y, int x, int c) { return data_[index(t, y, x, c)]; }
    double at(int t, int y, int x, int c) const { return data_[index(t, y, x, c)]; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    std::size_t frame_size() const { return static_cast<std::size_t>(dims_.h) * dims_.w * channels_; }
    std::span<const double> frame(int t) const { return std::span(data_).subspan(t * frame_size(), frame_size()); }
    std::span<double> frame(int t) { return std::span(data_).subspan(t * frame_size(), frame_size()); }

    VideoBuffer clamped() const;
    void clamp();

    friend bool operator==(const VideoBuffer&, const VideoBuffer&) = default;

private:
    std::size_t index(int t, int y, int x, int c) const
    {
        return ((static_cast<std::size_t>(t) * dims_.h + y) * dims_.w + x) * channels_ + c;
    }

    Dims3 dims_;
    int channels_ = 0;
    std::vector<double> data_;
};

/// Frames [first, first + count).
VideoBuffer frame_range(const VideoBuffer& video, int first, int count);

/// Mirror along x (column k -> W-1-k).
VideoBuffer flip_x(const VideoBuffer& video);

} // namespace vff
