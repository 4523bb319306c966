#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vff/frequency_bank.hpp"
#include "vff/geometry.hpp"
#include "vff/local_field.hpp"
#include "vff/psf.hpp"

namespace vff {

/// A T x H x W voxel grid of local expansions over one shared frequency bank.
/// Voxel (t, y, x) is centred on the input-sample coordinate (x, y, t) and
/// extends half a sample in every direction (pitch 1 on every axis).
///
/// Coefficients live in one dense tensor of shape T x H x W x C x N x 2, the
/// last axis being the (c, d) pair. FieldGrid stores single precision; the
/// double-precision variant exists for exact identity checks.
template <typename Scalar>
class BasicFieldGrid {
public:
    using value_type = Scalar;

    BasicFieldGrid(Dims3 dims, int channels, FrequencyBank bank);
    /// Throws StructuralError if coeffs.size() != T*H*W*C*N*2.
    BasicFieldGrid(Dims3 dims, int channels, FrequencyBank bank, std::vector<Scalar> coeffs);

    Dims3 dims() const { return dims_; }
    int channels() const { return channels_; }
    std::size_t n_basis() const { return bank_.size(); }
    const FrequencyBank& bank() const { return bank_; }

    /// Number of scalars per voxel, C * N * 2.
    std::size_t voxel_stride() const { return static_cast<std::size_t>(channels_) * bank_.size() * 2; }

    std::span<const Scalar> coeffs() const { return coeffs_; }
    std::span<Scalar> coeffs() { return coeffs_; }

    std::span<const Scalar> voxel(VoxelIndex j) const;
    std::span<Scalar> voxel(VoxelIndex j);

    LocalField local_field(VoxelIndex j) const;
    void set_local_field(VoxelIndex j, const LocalField& field);

    /// Precision conversion (rounds to nearest when narrowing).
    template <typename Other>
    BasicFieldGrid<Other> cast() const
    {
        return BasicFieldGrid<Other>(dims_, channels_, bank_, std::vector<Other>(coeffs_.begin(), coeffs_.end()));
    }

    friend bool operator==(const BasicFieldGrid&, const BasicFieldGrid&) = default;

private:
    Dims3 dims_;
    int channels_ = 0;
    FrequencyBank bank_;
    std::vector<Scalar> coeffs_;
};

using FieldGrid = BasicFieldGrid<float>;
using FieldGrid64 = BasicFieldGrid<double>;

/// Voxel lookup along one axis of n cells.
struct AxisLocation {
    int index = 0;
    double offset = 0.0;
};

/// Round-half-up to the nearest cell centre, clamped to [0, n-1]. Throws
/// DomainError unless coord lies in [-0.5, n - 0.5 + upper_slack]. A positive
/// slack lets the last cell extrapolate (offset > 0.5).
AxisLocation locate_axis(double coord, int n, double upper_slack = 0.0);

struct Location {
    VoxelIndex voxel;
    Vec3 offset;
};

/// Voxel containing p and the local offset u = p - centre.
Location locate(Dims3 dims, Vec3 p);

struct EvalOptions {
    /// Width (in samples, < 0.5) of the linear cross-fade band at voxel faces.
    /// Zero disables blending, which is the default.
    double crossfade_margin = 0.0;
};

template <typename Scalar>
std::vector<double> eval_grid_point(const BasicFieldGrid<Scalar>& grid, Vec3 p, const PsfSpec& psf = PsfSpec::point(),
                                    const EvalOptions& options = {});

namespace detail {

/// Evaluates a located point (offsets may exceed half a sample when the
/// caller allows extrapolation). `atten` comes from attenuation_table.
template <typename Scalar>
void eval_located(const BasicFieldGrid<Scalar>& grid, const Location& loc, std::span<const double> atten,
                  const EvalOptions& options, double* out);

} // namespace detail

/// Shifts the represented video by delta: the integer part relocates voxels
/// (vacated border voxels copy the nearest surviving voxel) and the
/// fractional part f in [-0.5, 0.5)^3 becomes a per-voxel phase shift.
template <typename Scalar>
BasicFieldGrid<Scalar> translate_grid(const BasicFieldGrid<Scalar>& grid, Vec3 delta);

/// Splits delta into integer part n (round-half-up) and remainder in [-0.5, 0.5).
void split_translation(Vec3 delta, VoxelIndex& whole, Vec3& fraction);

/// Grid whose voxels all describe the same global function g(p) = field(p):
/// voxel j holds field shifted so that its local expansion at offset u equals
/// field evaluated at j + u. Rendering it reproduces one seamless signal.
template <typename Scalar>
BasicFieldGrid<Scalar> tile_global_field(const LocalField& field, const FrequencyBank& bank, Dims3 dims);

} // namespace vff
