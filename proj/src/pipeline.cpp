#include "vff/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "vff/error.hpp"
#include "vff/parallel.hpp"

namespace vff {

double cubic_kernel(double x)
{
    constexpr double a = -0.5;
    const double ax = std::abs(x);
    if (ax < 1.0) {
        return ((a + 2.0) * ax - (a + 3.0)) * ax * ax + 1.0;
    }
    if (ax < 2.0) {
        return ((a * ax - 5.0 * a) * ax + 8.0 * a) * ax - 4.0 * a;
    }
    return 0.0;
}

namespace {

struct Taps {
    std::vector<int> index;
    std::vector<double> weight;
};

/// Normalised resampling taps for every output position of one axis.
std::vector<Taps> axis_taps(int n_in, int n_out, double s)
{
    const double support = 2.0 * std::max(1.0, s);
    const double stretch = std::max(1.0, s);
    std::vector<Taps> taps(static_cast<std::size_t>(n_out));
    for (int k = 0; k < n_out; ++k) {
        const double centre = (k + 0.5) * s - 0.5;
        const int lo = static_cast<int>(std::ceil(centre - support));
        const int hi = static_cast<int>(std::floor(centre + support));
        Taps& t = taps[static_cast<std::size_t>(k)];
        double sum = 0.0;
        for (int i = lo; i <= hi; ++i) {
            const double w = cubic_kernel((i - centre) / stretch);
            if (w == 0.0) {
                continue;
            }
            t.index.push_back(std::clamp(i, 0, n_in - 1));
            t.weight.push_back(w);
            sum += w;
        }
        for (double& w : t.weight) {
            w /= sum;
        }
    }
    return taps;
}

} // namespace

VideoBuffer bicubic_downsample(const VideoBuffer& video, double s, unsigned threads)
{
    if (!(s >= 1.0) || !std::isfinite(s)) {
        throw ConfigError("bicubic_downsample needs s >= 1 (upsampling is the field's job)");
    }
    if (s == 1.0) {
        return video.clamped();
    }
    const int h_out = std::max(1, static_cast<int>(std::lround(video.height() / s)));
    const int w_out = std::max(1, static_cast<int>(std::lround(video.width() / s)));
    const auto tx = axis_taps(video.width(), w_out, s);
    const auto ty = axis_taps(video.height(), h_out, s);
    const int channels = video.channels();
    VideoBuffer out({video.frames(), h_out, w_out}, channels);
    parallel_for(static_cast<std::size_t>(video.frames()), threads, [&](std::size_t f) {
        const int t = static_cast<int>(f);
        std::vector<double> rows(static_cast<std::size_t>(video.height()) * w_out * channels, 0.0);
        for (int y = 0; y < video.height(); ++y) {
            for (int k = 0; k < w_out; ++k) {
                const Taps& tp = tx[static_cast<std::size_t>(k)];
                for (int c = 0; c < channels; ++c) {
                    double acc = 0.0;
                    for (std::size_t q = 0; q < tp.index.size(); ++q) {
                        acc += tp.weight[q] * video.at(t, y, tp.index[q], c);
                    }
                    rows[(static_cast<std::size_t>(y) * w_out + k) * channels + c] = acc;
                }
            }
        }
        for (int i = 0; i < h_out; ++i) {
            const Taps& tp = ty[static_cast<std::size_t>(i)];
            for (int k = 0; k < w_out; ++k) {
                for (int c = 0; c < channels; ++c) {
                    double acc = 0.0;
                    for (std::size_t q = 0; q < tp.index.size(); ++q) {
                        acc += tp.weight[q] * rows[(static_cast<std::size_t>(tp.index[q]) * w_out + k) * channels + c];
                    }
                    out.at(t, i, k, c) = std::clamp(acc, 0.0, 1.0);
                }
            }
        }
    });
    return out;
}

VideoBuffer temporal_subsample(const VideoBuffer& video, int r)
{
    if (r < 1) {
        throw ConfigError("temporal factor must be >= 1");
    }
    if (video.frames() < r) {
        throw ConfigError("temporal factor " + std::to_string(r) + " exceeds the " + std::to_string(video.frames()) +
                          " available frames");
    }
    const int kept = (video.frames() + r - 1) / r;
    VideoBuffer out({kept, video.height(), video.width()}, video.channels());
    for (int k = 0; k < kept; ++k) {
        const auto src = video.frame(k * r);
        std::copy(src.begin(), src.end(), out.frame(k).begin());
    }
    return out;
}

VideoBuffer temporal_subsample(const VideoBuffer& video, double r)
{
    if (!std::isfinite(r) || r != std::floor(r)) {
        throw ConfigError("temporal subsampling needs an integer factor");
    }
    return temporal_subsample(video, static_cast<int>(r));
}

VideoBuffer degrade(const VideoBuffer& video, double s, int r, unsigned threads)
{
    return temporal_subsample(bicubic_downsample(video, s, threads), r);
}

PsfSpec auto_psf(double s, double r, double nu)
{
    if (!(s > 0.0) || !(r > 0.0)) {
        throw ConfigError("scale factors must be positive");
    }
    if (!(nu > 0.0)) {
        throw ConfigError("nu must be positive");
    }
    return PsfSpec::spatial(nu * s);
}

PsfSpec PsfPolicy::resolve(double s, double r) const
{
    if (mode == Mode::manual) {
        manual_spec.validate();
        return manual_spec;
    }
    return auto_psf(s, r, nu);
}

VideoBuffer stvsr(const VideoBuffer& lr, double s, double r, const FrequencyBank& bank, const FitConfig& fit_cfg,
                  const PsfPolicy& psf_policy)
{
    if (lr.empty()) {
        throw ConfigError("stvsr needs a non-empty input");
    }
    if (!(s >= 1.0) || !(r >= 1.0)) {
        throw ConfigError("stvsr scale factors must be >= 1");
    }
    const PsfSpec psf = psf_policy.resolve(s, r);
    const FieldGrid grid = fit_video(lr, bank, fit_cfg);
    VideoBuffer out = sample_grid(grid, SampleSpec::make(lr.dims(), s, r), psf, {fit_cfg.threads, {}});
    out.clamp();
    return out;
}

VideoBuffer trilinear_upsample(const VideoBuffer& lr, double s, double r)
{
    const SampleSpec spec = SampleSpec::make(lr.dims(), s, r);
    struct Lerp {
        int i0, i1;
        double f;
    };
    const auto lerp_of = [](double coord, int n) {
        const double c = std::clamp(coord, 0.0, static_cast<double>(n - 1));
        const int i0 = static_cast<int>(std::floor(c));
        const int i1 = std::min(i0 + 1, n - 1);
        return Lerp{i0, i1, c - i0};
    };
    VideoBuffer out(spec.output, lr.channels());
    for (int tau = 0; tau < spec.output.t; ++tau) {
        const Lerp lt = lerp_of(spec.t_coord(tau), lr.frames());
        for (int i = 0; i < spec.output.h; ++i) {
            const Lerp ly = lerp_of(spec.y_coord(i), lr.height());
            for (int k = 0; k < spec.output.w; ++k) {
                const Lerp lx = lerp_of(spec.x_coord(k), lr.width());
                for (int c = 0; c < lr.channels(); ++c) {
                    const auto plane = [&](int t) {
                        const double top = (1 - lx.f) * lr.at(t, ly.i0, lx.i0, c) + lx.f * lr.at(t, ly.i0, lx.i1, c);
                        const double bot = (1 - lx.f) * lr.at(t, ly.i1, lx.i0, c) + lx.f * lr.at(t, ly.i1, lx.i1, c);
                        return (1 - ly.f) * top + ly.f * bot;
                    };
                    out.at(tau, i, k, c) = (1 - lt.f) * plane(lt.i0) + lt.f * plane(lt.i1);
                }
            }
        }
    }
    return out;
}

} // namespace vff
