#pragma once

#include "vff/field_grid.hpp"
#include "vff/psf.hpp"
#include "vff/video.hpp"

namespace vff {

/// Output lattice for resampling a field of `input` dims by a spatial factor
/// s and a temporal factor r.
///
/// Spatial axes are pixel-centre aligned: output column k sits at input
/// coordinate (k + 0.5)/s - 0.5. The time axis is keyframe aligned: output
/// frame tau sits at tau / r, so frames 0, r, 2r, ... coincide with input
/// frames. Output frames past the last input frame (t > T - 0.5) are
/// extrapolated by the last temporal voxel.
struct SampleSpec {
    Dims3 input;
    Dims3 output;
    double spatial_scale = 1.0;
    double temporal_scale = 1.0;

    /// Output dims are round(r T) x round(s H) x round(s W). Throws
    /// ConfigError for non-positive factors or an empty output.
    static SampleSpec make(Dims3 input, double s, double r);

    double x_coord(int k) const { return (k + 0.5) / spatial_scale - 0.5; }
    double y_coord(int i) const { return (i + 0.5) / spatial_scale - 0.5; }
    double t_coord(int tau) const { return tau / temporal_scale; }
    Vec3 coord(int tau, int i, int k) const { return {x_coord(k), y_coord(i), t_coord(tau)}; }

    /// Allowed overrun of the temporal domain for tail frames.
    static constexpr double kTemporalSlack = 0.5;
};

struct SampleOptions {
    /// Worker threads; 0 picks the hardware concurrency.
    unsigned threads = 0;
    EvalOptions eval;
};

/// Samples the field on the output lattice. Voxels whose query offsets
/// coincide share one design matrix of attenuated sin/cos terms, and the
/// per-voxel values are obtained by contracting it with the coefficient
/// blocks (GEMM). With cross-fading enabled this falls back to the
/// per-point path. Values are not clamped.
template <typename Scalar>
VideoBuffer sample_grid(const BasicFieldGrid<Scalar>& grid, const SampleSpec& spec, const PsfSpec& psf,
                        const SampleOptions& options = {});

/// Per-point reference path: one eval per output sample.
template <typename Scalar>
VideoBuffer sample_grid_naive(const BasicFieldGrid<Scalar>& grid, const SampleSpec& spec, const PsfSpec& psf,
                              const SampleOptions& options = {});

/// Naive path restricted to output frames [first, first + count); used to
/// time the reference sampler on a slice of a large request.
template <typename Scalar>
VideoBuffer sample_grid_naive_frames(const BasicFieldGrid<Scalar>& grid, const SampleSpec& spec, const PsfSpec& psf,
                                     int first, int count, const SampleOptions& options = {});

} // namespace vff
