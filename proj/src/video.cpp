#include "vff/video.hpp"

#include <algorithm>
#include <string>

#include "vff/error.hpp"

namespace vff {

VideoBuffer::VideoBuffer(Dims3 dims, int channels, double fill)
    : dims_(dims)
    , channels_(channels)
    , data_(dims.count() * static_cast<std::size_t>(channels), fill)
{
    if (dims.t < 0 || dims.h < 0 || dims.w < 0 || channels <= 0) {
        throw StructuralError("invalid video shape " + dims.str());
    }
}

VideoBuffer::VideoBuffer(Dims3 dims, int channels, std::vector<double> data)
    : dims_(dims)
    , channels_(channels)
    , data_(std::move(data))
{
    if (dims.t < 0 || dims.h < 0 || dims.w < 0 || channels <= 0) {
        throw StructuralError("invalid video shape " + dims.str());
    }
    if (data_.size() != dims.count() * static_cast<std::size_t>(channels)) {
        throw StructuralError("video data length " + std::to_string(data_.size()) + " does not match " + dims.str() +
                              "x" + std::to_string(channels));
    }
}

VideoBuffer VideoBuffer::clamped() const
{
    VideoBuffer out = *this;
    out.clamp();
    return out;
}

void VideoBuffer::clamp()
{
    for (double& v : data_) {
        v = std::clamp(v, 0.0, 1.0);
    }
}

VideoBuffer frame_range(const VideoBuffer& video, int first, int count)
{
    if (first < 0 || count < 0 || first + count > video.frames()) {
        throw DomainError("frame range outside the video");
    }
    const auto src = video.data().subspan(first * video.frame_size(), count * video.frame_size());
    return VideoBuffer({count, video.height(), video.width()}, video.channels(),
                       std::vector<double>(src.begin(), src.end()));
}

VideoBuffer flip_x(const VideoBuffer& video)
{
    VideoBuffer out(video.dims(), video.channels());
    for (int t = 0; t < video.frames(); ++t) {
        for (int y = 0; y < video.height(); ++y) {
            for (int x = 0; x < video.width(); ++x) {
                for (int c = 0; c < video.channels(); ++c) {
                    out.at(t, y, video.width() - 1 - x, c) = video.at(t, y, x, c);
                }
            }
        }
    }
    return out;
}

} // namespace vff
