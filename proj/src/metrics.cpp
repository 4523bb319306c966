#include "vff/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include <unsupported/Eigen/FFT>

#include "vff/error.hpp"

namespace vff {

VideoBuffer rgb_to_luma(const VideoBuffer& video)
{
    if (video.channels() != 3) {
        throw StructuralError("rgb_to_luma expects 3 channels");
    }
    VideoBuffer out(video.dims(), 1);
    const auto src = video.data();
    auto dst = out.data();
    for (std::size_t p = 0; p < dst.size(); ++p) {
        dst[p] = (16.0 + 65.481 * src[3 * p] + 128.553 * src[3 * p + 1] + 24.966 * src[3 * p + 2]) / 255.0;
    }
    return out;
}

namespace {

void check_pair(const VideoBuffer& pred, const VideoBuffer& ref)
{
    if (!(pred.dims() == ref.dims()) || pred.channels() != ref.channels()) {
        throw StructuralError("metric inputs differ in shape: " + pred.dims().str() + " vs " + ref.dims().str());
    }
    if (pred.empty()) {
        throw StructuralError("metric inputs are empty");
    }
}

double mean_of(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

/// Luma view: 3-channel inputs are converted, single-channel inputs are
/// taken as luma already.
VideoBuffer as_luma(const VideoBuffer& v) { return v.channels() == 1 ? v : rgb_to_luma(v); }

} // namespace

FrameSeries psnr(const VideoBuffer& pred, const VideoBuffer& ref, bool on_luma)
{
    check_pair(pred, ref);
    const VideoBuffer a = on_luma ? as_luma(pred) : pred;
    const VideoBuffer b = on_luma ? as_luma(ref) : ref;
    FrameSeries series;
    for (int t = 0; t < a.frames(); ++t) {
        const auto fa = a.frame(t);
        const auto fb = b.frame(t);
        double sse = 0.0;
        for (std::size_t k = 0; k < fa.size(); ++k) {
            const double e = fa[k] - fb[k];
            sse += e * e;
        }
        const double mse = sse / static_cast<double>(fa.size());
        series.per_frame.push_back(mse == 0.0 ? kInfinitePsnr : 10.0 * std::log10(1.0 / mse));
    }
    series.mean = mean_of(series.per_frame);
    return series;
}

namespace {

constexpr int kSsimWindow = 11;

std::array<double, kSsimWindow> gaussian_taps()
{
    std::array<double, kSsimWindow> g{};
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = i - kSsimWindow / 2;
        g[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
        sum += g[static_cast<std::size_t>(i)];
    }
    for (double& v : g) {
        v /= sum;
    }
    return g;
}

/// Valid-region separable Gaussian filter of an h x w plane.
std::vector<double> filter_valid(const std::vector<double>& plane, int h, int w)
{
    static const auto g = gaussian_taps();
    const int wo = w - kSsimWindow + 1;
    const int ho = h - kSsimWindow + 1;
    std::vector<double> tmp(static_cast<std::size_t>(h) * wo);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < wo; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kSsimWindow; ++k) {
                acc += g[static_cast<std::size_t>(k)] * plane[static_cast<std::size_t>(y) * w + x + k];
            }
            tmp[static_cast<std::size_t>(y) * wo + x] = acc;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(ho) * wo);
    for (int y = 0; y < ho; ++y) {
        for (int x = 0; x < wo; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kSsimWindow; ++k) {
                acc += g[static_cast<std::size_t>(k)] * tmp[static_cast<std::size_t>(y + k) * wo + x];
            }
            out[static_cast<std::size_t>(y) * wo + x] = acc;
        }
    }
    return out;
}

} // namespace

FrameSeries ssim(const VideoBuffer& pred, const VideoBuffer& ref)
{
    check_pair(pred, ref);
    if (pred.height() < kSsimWindow || pred.width() < kSsimWindow) {
        throw ConfigError("ssim needs frames of at least 11x11, got " + std::to_string(pred.height()) + "x" +
                          std::to_string(pred.width()));
    }
    const VideoBuffer a = as_luma(pred);
    const VideoBuffer b = as_luma(ref);
    constexpr double c1 = (0.01 * 1.0) * (0.01 * 1.0);
    constexpr double c2 = (0.03 * 1.0) * (0.03 * 1.0);
    const int h = a.height();
    const int w = a.width();
    FrameSeries series;
    for (int t = 0; t < a.frames(); ++t) {
        const auto fa = a.frame(t);
        const auto fb = b.frame(t);
        std::vector<double> x(fa.begin(), fa.end());
        std::vector<double> y(fb.begin(), fb.end());
        std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) {
            xx[k] = x[k] * x[k];
            yy[k] = y[k] * y[k];
            xy[k] = x[k] * y[k];
        }
        const auto mx = filter_valid(x, h, w);
        const auto my = filter_valid(y, h, w);
        const auto sxx = filter_valid(xx, h, w);
        const auto syy = filter_valid(yy, h, w);
        const auto sxy = filter_valid(xy, h, w);
        double acc = 0.0;
        for (std::size_t k = 0; k < mx.size(); ++k) {
            const double vx = sxx[k] - mx[k] * mx[k];
            const double vy = syy[k] - my[k] * my[k];
            const double cov = sxy[k] - mx[k] * my[k];
            acc += ((2.0 * mx[k] * my[k] + c1) * (2.0 * cov + c2)) /
                   ((mx[k] * mx[k] + my[k] * my[k] + c1) * (vx + vy + c2));
        }
        series.per_frame.push_back(acc / static_cast<double>(mx.size()));
    }
    series.mean = mean_of(series.per_frame);
    return series;
}

std::string to_string(FrameKind kind) { return kind == FrameKind::keyframe ? "keyframe" : "interpolated"; }

std::vector<FrameKind> classify_frames(int frames, int r)
{
    std::vector<FrameKind> kinds(static_cast<std::size_t>(std::max(frames, 0)), FrameKind::keyframe);
    if (r > 1) {
        for (int t = 0; t < frames; ++t) {
            kinds[static_cast<std::size_t>(t)] = t % r == 0 ? FrameKind::keyframe : FrameKind::interpolated;
        }
    }
    return kinds;
}

double MetricReport::mean_over(const std::vector<double>& series, const std::vector<FrameKind>& kinds, FrameKind kind)
{
    double sum = 0.0;
    int count = 0;
    for (std::size_t t = 0; t < series.size() && t < kinds.size(); ++t) {
        if (kinds[t] == kind) {
            sum += series[t];
            ++count;
        }
    }
    return count == 0 ? std::nan("") : sum / count;
}

double spatial_energy_above(const VideoBuffer& video, double cutoff)
{
    const int h = video.height();
    const int w = video.width();
    const auto freq = [](int k, int n) {
        const int kk = k <= n / 2 ? k : k - n;
        return std::abs(2.0 * std::numbers::pi * kk / n);
    };
    Eigen::FFT<double> fft;
    double energy = 0.0;
    std::vector<std::complex<double>> line_in, line_out;
    std::vector<std::complex<double>> plane(static_cast<std::size_t>(h) * w);
    for (int t = 0; t < video.frames(); ++t) {
        for (int c = 0; c < video.channels(); ++c) {
            for (int y = 0; y < h; ++y) {
                line_in.assign(static_cast<std::size_t>(w), {});
                for (int x = 0; x < w; ++x) {
                    line_in[static_cast<std::size_t>(x)] = video.at(t, y, x, c);
                }
                fft.fwd(line_out, line_in);
                std::copy(line_out.begin(), line_out.end(), plane.begin() + static_cast<std::ptrdiff_t>(y) * w);
            }
            for (int x = 0; x < w; ++x) {
                line_in.assign(static_cast<std::size_t>(h), {});
                for (int y = 0; y < h; ++y) {
                    line_in[static_cast<std::size_t>(y)] = plane[static_cast<std::size_t>(y) * w + x];
                }
                fft.fwd(line_out, line_in);
                for (int y = 0; y < h; ++y) {
                    if (freq(x, w) > cutoff || freq(y, h) > cutoff) {
                        energy += std::norm(line_out[static_cast<std::size_t>(y)]);
                    }
                }
            }
        }
    }
    return energy;
}

} // namespace vff
