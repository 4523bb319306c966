#include "vff/psf.hpp"

#include <cmath>
#include <numbers>

#include "vff/error.hpp"

namespace vff {

namespace {

bool valid_sigma(double s) { return s == kPointSampling || (std::isfinite(s) && s > 0.0); }

} // namespace

bool PsfSpec::is_point() const
{
    return sigma_x == kPointSampling && sigma_y == kPointSampling && sigma_t == kPointSampling;
}

void PsfSpec::validate() const
{
    if (!valid_sigma(sigma_x) || !valid_sigma(sigma_y) || !valid_sigma(sigma_t)) {
        throw ConfigError("psf sigma must be positive (or the point-sampling sentinel)");
    }
}

double axis_attenuation(double omega, double sigma)
{
    if (sigma == kPointSampling || omega == 0.0) {
        return 1.0;
    }
    constexpr double eight_pi_sq = 8.0 * std::numbers::pi * std::numbers::pi;
    return std::exp(-(omega * omega) / (eight_pi_sq * sigma * sigma));
}

double psf_attenuation(Vec3 omega, const PsfSpec& psf)
{
    return axis_attenuation(omega.x, psf.sigma_x) * axis_attenuation(omega.y, psf.sigma_y) *
           axis_attenuation(omega.t, psf.sigma_t);
}

} // namespace vff
