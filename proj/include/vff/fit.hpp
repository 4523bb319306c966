#pragma once

#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vff/field_grid.hpp"
#include "vff/frequency_bank.hpp"
#include "vff/local_field.hpp"
#include "vff/video.hpp"

namespace vff {

/// Marks "no weighting" for FitConfig::sample_weight_sigma.
inline constexpr double kUniformWeights = std::numeric_limits<double>::infinity();

enum class BorderMode {
    /// The window slides (and, for tiny videos, shrinks) so that it stays
    /// inside the video; offsets stay relative to the voxel centre.
    clamp,
    /// The window stays centred; samples past an edge are mirrored
    /// (whole-sample reflection, edge not repeated).
    reflect,
};

struct FitConfig {
    /// Odd window extents (t, y, x) in input samples.
    Dims3 window{5, 9, 9};
    double ridge_lambda = 1e-3;
    /// Gaussian sample weighting width in samples, or kUniformWeights.
    double sample_weight_sigma = 3.0;
    BorderMode border_mode = BorderMode::reflect;
    unsigned threads = 0;

    void validate() const;
};

enum class BankStrategy {
    /// Latin hypercube over [0, wx] x [-wy, wy] x [-wt, wt].
    stratified_random,
    /// Regular lattice in the half space w_x >= 0, nearest-to-origin first.
    axis_grid,
};

struct BankInitConfig {
    std::size_t n_basis = 512;
    Vec3 omega_max{4 * std::numbers::pi, 4 * std::numbers::pi, 4 * std::numbers::pi};
    BankStrategy strategy = BankStrategy::stratified_random;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Deterministic bank with the DC entry at index 0.
FrequencyBank init_bank(const BankInitConfig& cfg);

/// Rows [sin(w_1.u) ... sin(w_N.u), cos(w_1.u) ... cos(w_N.u)] per offset.
Eigen::MatrixXd design_matrix(const FrequencyBank& bank, std::span<const Vec3> offsets);

/// Weighted ridge fit of the window around `center`, independently per
/// channel. The DC cosine coefficient is not penalised; the DC sine
/// coefficient is identically zero and is not an unknown. With lambda == 0 a
/// column-pivoted QR is used and rank deficiency raises RankDeficiencyError.
LocalField fit_voxel(const VideoBuffer& video, VoxelIndex center, const FrequencyBank& bank, const FitConfig& cfg);

/// fit_voxel at every voxel. Voxels with identical window geometry share one
/// factorisation; results do not depend on the thread count.
template <typename Scalar = float>
BasicFieldGrid<Scalar> fit_video(const VideoBuffer& video, const FrequencyBank& bank, const FitConfig& cfg);

struct RefineConfig {
    int iterations = 0;
    /// Initial step length in rad/sample; adapted during descent.
    double step = 0.05;
    /// Central-difference half width for the gradient.
    double fd_epsilon = 1e-4;
    /// Share of the corpus (from the end) used as holdout.
    double holdout_fraction = 0.25;

    void validate() const;
};

/// Mean squared error of fit_video followed by identity sampling, averaged
/// over the clips.
double reconstruction_error(std::span<const VideoBuffer> clips, const FrequencyBank& bank, const FitConfig& fit_cfg);

/// Finite-difference descent on the non-DC frequencies. Returns the bank with
/// the lowest holdout error seen (the initial bank if nothing improves).
FrequencyBank refine_bank(std::span<const VideoBuffer> corpus, const FrequencyBank& bank, const FitConfig& fit_cfg,
                          const RefineConfig& refine_cfg);

} // namespace vff
