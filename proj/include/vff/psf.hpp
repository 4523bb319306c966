#pragma once

#include <limits>

#include "vff/geometry.hpp"

namespace vff {

/// Sigma value that switches an axis to point sampling (no attenuation).
inline constexpr double kPointSampling = std::numeric_limits<double>::infinity();

/// Per-axis bandwidth of a Gaussian point spread function. In the frequency
/// domain a basis term of angular frequency w is scaled by
/// exp(-w^2 / (8 pi^2 sigma^2)) on each axis, i.e. the spatial kernel has
/// standard deviation 1 / (2 pi sigma). Larger sigma therefore means a
/// narrower kernel and less smoothing; blur grows as sigma shrinks.
struct PsfSpec {
    double sigma_x = kPointSampling;
    double sigma_y = kPointSampling;
    double sigma_t = kPointSampling;

    static constexpr PsfSpec point() { return {}; }
    static constexpr PsfSpec spatial(double sigma) { return {sigma, sigma, kPointSampling}; }
    static constexpr PsfSpec isotropic(double sigma) { return {sigma, sigma, sigma}; }

    bool is_point() const;
    /// Throws ConfigError unless every sigma is the sentinel or positive and finite.
    void validate() const;

    friend bool operator==(const PsfSpec&, const PsfSpec&) = default;
};

/// Attenuation of a single axis.
double axis_attenuation(double omega, double sigma);

/// Product of the three axis attenuations, in [0, 1]. Exactly 1 for the
/// zero frequency or an all-sentinel spec.
double psf_attenuation(Vec3 omega, const PsfSpec& psf);

} // namespace vff
