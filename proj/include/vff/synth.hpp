#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "vff/video.hpp"

namespace vff {

enum class SynthPattern { translating_sinusoid, translating_checkerboard, rotating_bars, accelerating_dot };

/// Throws ConfigError for an unknown name.
SynthPattern parse_pattern(const std::string& name);
std::string to_string(SynthPattern pattern);

/// Closed-form test scene. Units are pixels and frames of the nominal
/// (ground-truth) resolution; pixel centres sit at integer coordinates.
struct SynthSpec {
    SynthPattern pattern = SynthPattern::translating_sinusoid;
    Dims3 dims{16, 64, 64};
    /// Pixels per frame.
    double velocity_x = 1.0;
    double velocity_y = 0.0;
    /// Pixels per frame^2 (accelerating-dot).
    double accel_x = 0.0;
    double accel_y = 0.0;
    /// Radians per frame (rotating-bars).
    double angular_rate = 0.05;
    /// Spatial angular frequency in rad/pixel (sinusoid, bars) or the cell
    /// size in pixels (checkerboard, as pi / frequency).
    double freq_x = 0.4;
    double freq_y = 0.2;
    double amplitude = 0.3;
    /// Dot radius in pixels.
    double radius = 3.0;
    std::uint64_t seed = 0;
};

/// Analytic scene value at continuous (x, y, t), channel c. Always in [0, 1].
class SynthScene {
public:
    explicit SynthScene(const SynthSpec& spec);

    double value(double x, double y, double t, int c) const;
    const SynthSpec& spec() const { return spec_; }

    /// Samples the scene at integer pixel/frame coordinates of spec.dims.
    VideoBuffer render() const;

    /// Human-readable description of the scene and its motion.
    std::string describe() const;

private:
    SynthSpec spec_;
    std::array<double, 3> phase_{};
    double origin_x_ = 0.0;
    double origin_y_ = 0.0;
};

} // namespace vff
