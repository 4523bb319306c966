#pragma once

#include "vff/field_grid.hpp"
#include "vff/fit.hpp"
#include "vff/psf.hpp"
#include "vff/sampler.hpp"
#include "vff/video.hpp"

namespace vff {

/// Catmull-Rom cubic (a = -0.5).
double cubic_kernel(double x);

/// Separable bicubic resampling by 1/s per frame. Output pixel k sits at
/// input coordinate (k + 0.5) s - 0.5 and the kernel footprint is widened by
/// s, so this is an anti-aliased downscale. Output dims round(H/s) x
/// round(W/s) (at least 1); values clamped to [0, 1]. Throws ConfigError for s < 1.
VideoBuffer bicubic_downsample(const VideoBuffer& video, double s, unsigned threads = 0);

/// Keeps frames 0, r, 2r, ... Throws ConfigError unless r >= 1 and T >= r.
VideoBuffer temporal_subsample(const VideoBuffer& video, int r);

/// Overload for a real factor; non-integer values raise ConfigError.
VideoBuffer temporal_subsample(const VideoBuffer& video, double r);

/// Spatial bicubic downsampling followed by temporal subsampling.
VideoBuffer degrade(const VideoBuffer& video, double s, int r, unsigned threads = 0);

/// sigma_x = sigma_y = nu * s, point sampling in time.
PsfSpec auto_psf(double s, double r, double nu = 0.5);

struct PsfPolicy {
    enum class Mode { automatic, manual };
    Mode mode = Mode::automatic;
    PsfSpec manual_spec = PsfSpec::point();
    double nu = 0.5;

    static PsfPolicy automatic_with(double nu) { return {Mode::automatic, PsfSpec::point(), nu}; }
    static PsfPolicy manual(PsfSpec spec) { return {Mode::manual, spec, 0.5}; }

    PsfSpec resolve(double s, double r) const;
};

/// fit_video followed by sample_grid at (s, r), clamped to [0, 1].
VideoBuffer stvsr(const VideoBuffer& lr, double s, double r, const FrequencyBank& bank, const FitConfig& fit_cfg,
                  const PsfPolicy& psf_policy);

/// Trilinear interpolation of `lr` on the SampleSpec lattice (edge clamped);
/// the baseline the field pipeline is compared against.
VideoBuffer trilinear_upsample(const VideoBuffer& lr, double s, double r);

} // namespace vff
