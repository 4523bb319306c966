#pragma once

#include <limits>
#include <string>
#include <vector>

#include "vff/video.hpp"

namespace vff {

/// Reported PSNR for identical inputs.
inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

/// BT.601 studio-swing luma Y = (16 + 65.481 R + 128.553 G + 24.966 B) / 255,
/// one channel.
VideoBuffer rgb_to_luma(const VideoBuffer& video);

struct FrameSeries {
    std::vector<double> per_frame;
    double mean = 0.0;
};

/// 10 log10(1 / MSE) per frame (peak 1.0). Computed on luma when on_luma,
/// otherwise over all channels. Identical frames report kInfinitePsnr.
FrameSeries psnr(const VideoBuffer& pred, const VideoBuffer& ref, bool on_luma);

/// Single-scale SSIM on luma: 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03, peak 1.0, averaged over the valid (unpadded) positions.
/// Throws ConfigError for frames smaller than 11x11.
FrameSeries ssim(const VideoBuffer& pred, const VideoBuffer& ref);

enum class FrameKind { keyframe, interpolated };

std::string to_string(FrameKind kind);

/// Output frame tau is a keyframe when tau % r == 0. r <= 1 marks every frame
/// a keyframe.
std::vector<FrameKind> classify_frames(int frames, int r);

struct MetricReport {
    FrameSeries psnr_db;
    FrameSeries ssim;
    std::vector<FrameKind> kinds;
    bool has_psnr = false;
    bool has_ssim = false;

    /// Mean of a per-frame series over frames of the given kind (NaN if none).
    static double mean_over(const std::vector<double>& series, const std::vector<FrameKind>& kinds, FrameKind kind);
};

/// Sum of |DFT|^2 over spatial frequencies with |w_x| > cutoff or
/// |w_y| > cutoff (rad/pixel of `video`), over frames and channels.
double spatial_energy_above(const VideoBuffer& video, double cutoff);

} // namespace vff
