#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "vff/frequency_bank.hpp"
#include "vff/geometry.hpp"
#include "vff/psf.hpp"

namespace vff {

struct AmpPhase {
    double amplitude = 0.0;
    double phase = 0.0;
};

/// (c, d) -> (a, phi) with a >= 0 and phi in [-pi, pi), such that
/// a sin(theta + phi) == c sin(theta) + d cos(theta).
AmpPhase coeff_to_amp_phase(double c, double d);

struct SinCos {
    double c = 0.0; ///< coefficient of sin
    double d = 0.0; ///< coefficient of cos
};

SinCos amp_phase_to_coeff(AmpPhase ap);

/// Expansion of one voxel: for each channel and basis entry a pair (c, d).
/// Coefficients are stored channel-major, then basis, then the (c, d) pair,
/// matching one voxel block of a FieldGrid.
class LocalField {
public:
    LocalField() = default;
    LocalField(int channels, std::size_t n_basis);

    int channels() const { return channels_; }
    std::size_t n_basis() const { return n_basis_; }

    double& c(int channel, std::size_t i) { return data_[slot(channel, i)]; }
    double& d(int channel, std::size_t i) { return data_[slot(channel, i) + 1]; }
    double c(int channel, std::size_t i) const { return data_[slot(channel, i)]; }
    double d(int channel, std::size_t i) const { return data_[slot(channel, i) + 1]; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    friend bool operator==(const LocalField&, const LocalField&) = default;

private:
    std::size_t slot(int channel, std::size_t i) const
    {
        return (static_cast<std::size_t>(channel) * n_basis_ + i) * 2;
    }

    int channels_ = 0;
    std::size_t n_basis_ = 0;
    std::vector<double> data_;
};

/// Per-channel value of sum_i xi(w_i) (c_i sin(w_i.u) + d_i cos(w_i.u)) at
/// local offset u. Throws StructuralError on a bank/field size mismatch.
std::vector<double> eval_local(const LocalField& field, const FrequencyBank& bank, Vec3 u,
                               const PsfSpec& psf = PsfSpec::point());

/// Returns F' with F'(u) == F(u - delta): every (c_i, d_i) is rotated by
/// -w_i.delta.
LocalField phase_shift(const LocalField& field, const FrequencyBank& bank, Vec3 delta);

namespace detail {

/// Attenuation factor per bank entry; all ones for point sampling.
std::vector<double> attenuation_table(const FrequencyBank& bank, const PsfSpec& psf);

/// Accumulates one voxel block into out[0..channels). Terms are summed in
/// bank order into a double accumulator; the same routine backs every
/// per-point evaluation so results agree bitwise.
template <typename Scalar>
void accumulate_terms(const Scalar* block, int channels, const FrequencyBank& bank,
                      std::span<const double> atten, Vec3 u, double* out)
{
    const std::size_t n = bank.size();
    for (int ch = 0; ch < channels; ++ch) {
        out[ch] = 0.0;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double theta = dot(bank.omega(i), u);
        const double s = std::sin(theta);
        const double co = std::cos(theta);
        const double xi = atten[i];
        for (int ch = 0; ch < channels; ++ch) {
            const Scalar* pair = block + (static_cast<std::size_t>(ch) * n + i) * 2;
            out[ch] += xi * (static_cast<double>(pair[0]) * s + static_cast<double>(pair[1]) * co);
        }
    }
}

/// Rotates (c, d) by -alpha. alpha == 0 leaves the pair untouched.
inline void rotate_pair(double& c, double& d, double alpha)
{
    if (alpha == 0.0) {
        return;
    }
    const double ca = std::cos(alpha);
    const double sa = std::sin(alpha);
    const double c0 = c;
    const double d0 = d;
    c = c0 * ca + d0 * sa;
    d = d0 * ca - c0 * sa;
}

} // namespace detail

} // namespace vff
