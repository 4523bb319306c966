#include "vff/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "vff/error.hpp"
#include "vff/rng.hpp"

namespace vff {

SynthPattern parse_pattern(const std::string& name)
{
    if (name == "translating-sinusoid") {
        return SynthPattern::translating_sinusoid;
    }
    if (name == "translating-checkerboard") {
        return SynthPattern::translating_checkerboard;
    }
    if (name == "rotating-bars") {
        return SynthPattern::rotating_bars;
    }
    if (name == "accelerating-dot") {
        return SynthPattern::accelerating_dot;
    }
    throw ConfigError("unknown pattern '" + name + "'");
}

std::string to_string(SynthPattern pattern)
{
    switch (pattern) {
    case SynthPattern::translating_sinusoid:
        return "translating-sinusoid";
    case SynthPattern::translating_checkerboard:
        return "translating-checkerboard";
    case SynthPattern::rotating_bars:
        return "rotating-bars";
    case SynthPattern::accelerating_dot:
        return "accelerating-dot";
    }
    return "unknown";
}

SynthScene::SynthScene(const SynthSpec& spec)
    : spec_(spec)
{
    if (spec_.dims.empty()) {
        throw ConfigError("synthetic dims must be positive, got " + spec_.dims.str());
    }
    spec_.amplitude = std::clamp(spec_.amplitude, 0.0, 0.5);
    SplitMix64 rng(spec_.seed);
    for (double& p : phase_) {
        p = rng.uniform(-std::numbers::pi, std::numbers::pi);
    }
    origin_x_ = rng.uniform(0.25, 0.75) * (spec_.dims.w - 1);
    origin_y_ = rng.uniform(0.25, 0.75) * (spec_.dims.h - 1);
}

double SynthScene::value(double x, double y, double t, int c) const
{
    const SynthSpec& s = spec_;
    switch (s.pattern) {
    case SynthPattern::translating_sinusoid:
        return 0.5 + s.amplitude * std::sin(s.freq_x * (x - s.velocity_x * t) + s.freq_y * (y - s.velocity_y * t) +
                                            phase_[static_cast<std::size_t>(c)]);
    case SynthPattern::translating_checkerboard: {
        const double a = std::sin(s.freq_x * (x - s.velocity_x * t) + phase_[0]);
        const double b = std::sin(s.freq_y * (y - s.velocity_y * t) + phase_[1]);
        return 0.5 + (a * b >= 0.0 ? s.amplitude : -s.amplitude);
    }
    case SynthPattern::rotating_bars: {
        const double theta = phase_[0] + s.angular_rate * t;
        const double cx = (s.dims.w - 1) / 2.0;
        const double cy = (s.dims.h - 1) / 2.0;
        const double along = (x - cx) * std::cos(theta) + (y - cy) * std::sin(theta);
        return 0.5 + s.amplitude * std::sin(s.freq_x * along + phase_[static_cast<std::size_t>(c)]);
    }
    case SynthPattern::accelerating_dot: {
        const double px = origin_x_ + s.velocity_x * t + 0.5 * s.accel_x * t * t;
        const double py = origin_y_ + s.velocity_y * t + 0.5 * s.accel_y * t * t;
        const double r2 = (x - px) * (x - px) + (y - py) * (y - py);
        const double tint = 0.6 + 0.2 * c;
        return 0.1 + 0.8 * tint * std::exp(-r2 / (2.0 * s.radius * s.radius));
    }
    }
    return 0.0;
}

VideoBuffer SynthScene::render() const
{
    VideoBuffer out(spec_.dims, 3);
    for (int t = 0; t < spec_.dims.t; ++t) {
        for (int y = 0; y < spec_.dims.h; ++y) {
            for (int x = 0; x < spec_.dims.w; ++x) {
                for (int c = 0; c < 3; ++c) {
                    out.at(t, y, x, c) = std::clamp(value(x, y, t, c), 0.0, 1.0);
                }
            }
        }
    }
    return out;
}

std::string SynthScene::describe() const
{
    const SynthSpec& s = spec_;
    std::ostringstream out;
    out.precision(17);
    out << "pattern=" << to_string(s.pattern) << "\n"
        << "dims=" << s.dims.str() << "\n"
        << "seed=" << s.seed << "\n";
    switch (s.pattern) {
    case SynthPattern::translating_sinusoid:
        out << "value(x,y,t,c)=0.5+" << s.amplitude << "*sin(" << s.freq_x << "*(x-" << s.velocity_x << "*t)+"
            << s.freq_y << "*(y-" << s.velocity_y << "*t)+phase[c])\n"
            << "phase=" << phase_[0] << "," << phase_[1] << "," << phase_[2] << "\n"
            << "motion=translation velocity=(" << s.velocity_x << "," << s.velocity_y << ") px/frame\n";
        break;
    case SynthPattern::translating_checkerboard:
        out << "value=0.5+/-" << s.amplitude << " by sign of sin(" << s.freq_x << "*(x-vx*t)+" << phase_[0]
            << ")*sin(" << s.freq_y << "*(y-vy*t)+" << phase_[1] << ")\n"
            << "motion=translation velocity=(" << s.velocity_x << "," << s.velocity_y << ") px/frame\n";
        break;
    case SynthPattern::rotating_bars:
        out << "value=0.5+" << s.amplitude << "*sin(" << s.freq_x << "*along(theta(t))+phase[c])\n"
            << "motion=rotation theta(t)=" << phase_[0] << "+" << s.angular_rate << "*t rad\n";
        break;
    case SynthPattern::accelerating_dot:
        out << "value=0.1+0.8*tint[c]*exp(-r^2/(2*" << s.radius << "^2))\n"
            << "motion=p(t)=(" << origin_x_ << "," << origin_y_ << ")+(" << s.velocity_x << "," << s.velocity_y
            << ")*t+0.5*(" << s.accel_x << "," << s.accel_y << ")*t^2\n";
        break;
    }
    return out.str();
}

} // namespace vff
