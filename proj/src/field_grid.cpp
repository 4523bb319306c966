#include "vff/field_grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "vff/error.hpp"

namespace vff {

template <typename Scalar>
BasicFieldGrid<Scalar>::BasicFieldGrid(Dims3 dims, int channels, FrequencyBank bank)
    : dims_(dims)
    , channels_(channels)
    , bank_(std::move(bank))
{
    if (dims.empty() || channels <= 0) {
        throw StructuralError("field grid dims must be positive, got " + dims.str());
    }
    coeffs_.assign(dims_.count() * voxel_stride(), Scalar(0));
}

template <typename Scalar>
BasicFieldGrid<Scalar>::BasicFieldGrid(Dims3 dims, int channels, FrequencyBank bank, std::vector<Scalar> coeffs)
    : dims_(dims)
    , channels_(channels)
    , bank_(std::move(bank))
    , coeffs_(std::move(coeffs))
{
    if (dims.empty() || channels <= 0) {
        throw StructuralError("field grid dims must be positive, got " + dims.str());
    }
    if (coeffs_.size() != dims_.count() * voxel_stride()) {
        throw StructuralError("coefficient tensor has " + std::to_string(coeffs_.size()) + " values, expected " +
                              std::to_string(dims_.count() * voxel_stride()));
    }
}

template <typename Scalar>
std::span<const Scalar> BasicFieldGrid<Scalar>::voxel(VoxelIndex j) const
{
    return std::span<const Scalar>(coeffs_).subspan(linear_index(dims_, j) * voxel_stride(), voxel_stride());
}

template <typename Scalar>
std::span<Scalar> BasicFieldGrid<Scalar>::voxel(VoxelIndex j)
{
    return std::span<Scalar>(coeffs_).subspan(linear_index(dims_, j) * voxel_stride(), voxel_stride());
}

template <typename Scalar>
LocalField BasicFieldGrid<Scalar>::local_field(VoxelIndex j) const
{
    LocalField field(channels_, bank_.size());
    const auto block = voxel(j);
    std::copy(block.begin(), block.end(), field.data().begin());
    return field;
}

template <typename Scalar>
void BasicFieldGrid<Scalar>::set_local_field(VoxelIndex j, const LocalField& field)
{
    if (field.channels() != channels_ || field.n_basis() != bank_.size()) {
        throw StructuralError("local field shape does not match the grid");
    }
    const auto src = field.data();
    auto dst = voxel(j);
    for (std::size_t k = 0; k < src.size(); ++k) {
        dst[k] = static_cast<Scalar>(src[k]);
    }
}

AxisLocation locate_axis(double coord, int n, double upper_slack)
{
    if (!std::isfinite(coord) || coord < -0.5 || coord > n - 0.5 + upper_slack) {
        throw DomainError("coordinate " + std::to_string(coord) + " outside [-0.5, " + std::to_string(n - 0.5) + "]");
    }
    const int j = std::clamp(static_cast<int>(std::floor(coord + 0.5)), 0, n - 1);
    return {j, coord - j};
}

Location locate(Dims3 dims, Vec3 p)
{
    const AxisLocation lx = locate_axis(p.x, dims.w);
    const AxisLocation ly = locate_axis(p.y, dims.h);
    const AxisLocation lt = locate_axis(p.t, dims.t);
    return {{lt.index, ly.index, lx.index}, {lx.offset, ly.offset, lt.offset}};
}

namespace {

template <typename Scalar>
void eval_crossfaded(const BasicFieldGrid<Scalar>& grid, const Location& loc, std::span<const double> atten,
                     double margin, double* out)
{
    // Per axis: the owning voxel plus, inside the margin band, the neighbour
    // across the nearer face with weight rising linearly to 1/2 at the face.
    struct Tap {
        int delta;
        double weight;
    };
    const std::array<double, 3> u{loc.offset.t, loc.offset.y, loc.offset.x};
    const std::array<int, 3> j{loc.voxel.t, loc.voxel.y, loc.voxel.x};
    const std::array<int, 3> n{grid.dims().t, grid.dims().h, grid.dims().w};
    std::array<std::array<Tap, 2>, 3> taps{};
    std::array<int, 3> tap_count{};
    for (int a = 0; a < 3; ++a) {
        taps[a][0] = {0, 1.0};
        tap_count[a] = 1;
        const double inner = 0.5 - margin;
        const double mag = std::abs(u[a]);
        const int side = u[a] < 0 ? -1 : 1;
        if (mag > inner && j[a] + side >= 0 && j[a] + side < n[a]) {
            const double w = std::min(0.5, (mag - inner) / (2.0 * margin));
            taps[a][0].weight = 1.0 - w;
            taps[a][1] = {side, w};
            tap_count[a] = 2;
        }
    }
    const auto channels = static_cast<std::size_t>(grid.channels());
    std::fill(out, out + channels, 0.0);
    std::vector<double> term(channels);
    for (int it = 0; it < tap_count[0]; ++it) {
        for (int iy = 0; iy < tap_count[1]; ++iy) {
            for (int ix = 0; ix < tap_count[2]; ++ix) {
                const Tap& tt = taps[0][it];
                const Tap& ty = taps[1][iy];
                const Tap& tx = taps[2][ix];
                const VoxelIndex v{j[0] + tt.delta, j[1] + ty.delta, j[2] + tx.delta};
                const Vec3 local{u[2] - tx.delta, u[1] - ty.delta, u[0] - tt.delta};
                detail::accumulate_terms(grid.voxel(v).data(), grid.channels(), grid.bank(), atten, local, term.data());
                const double w = tt.weight * ty.weight * tx.weight;
                for (std::size_t c = 0; c < channels; ++c) {
                    out[c] += w * term[c];
                }
            }
        }
    }
}

} // namespace

namespace detail {

template <typename Scalar>
void eval_located(const BasicFieldGrid<Scalar>& grid, const Location& loc, std::span<const double> atten,
                  const EvalOptions& options, double* out)
{
    if (options.crossfade_margin > 0.0) {
        if (options.crossfade_margin >= 0.5) {
            throw ConfigError("cross-fade margin must be below 0.5");
        }
        eval_crossfaded(grid, loc, atten, options.crossfade_margin, out);
        return;
    }
    accumulate_terms(grid.voxel(loc.voxel).data(), grid.channels(), grid.bank(), atten, loc.offset, out);
}

template void eval_located(const FieldGrid&, const Location&, std::span<const double>, const EvalOptions&, double*);
template void eval_located(const FieldGrid64&, const Location&, std::span<const double>, const EvalOptions&,
                           double*);

} // namespace detail

template <typename Scalar>
std::vector<double> eval_grid_point(const BasicFieldGrid<Scalar>& grid, Vec3 p, const PsfSpec& psf,
                                    const EvalOptions& options)
{
    psf.validate();
    const Location loc = locate(grid.dims(), p);
    const std::vector<double> atten = detail::attenuation_table(grid.bank(), psf);
    std::vector<double> out(static_cast<std::size_t>(grid.channels()));
    detail::eval_located(grid, loc, atten, options, out.data());
    return out;
}

void split_translation(Vec3 delta, VoxelIndex& whole, Vec3& fraction)
{
    if (!is_finite(delta)) {
        throw DomainError("translation must be finite");
    }
    const double nx = std::floor(delta.x + 0.5);
    const double ny = std::floor(delta.y + 0.5);
    const double nt = std::floor(delta.t + 0.5);
    whole = {static_cast<int>(nt), static_cast<int>(ny), static_cast<int>(nx)};
    fraction = {delta.x - nx, delta.y - ny, delta.t - nt};
}

template <typename Scalar>
BasicFieldGrid<Scalar> translate_grid(const BasicFieldGrid<Scalar>& grid, Vec3 delta)
{
    VoxelIndex whole;
    Vec3 frac;
    split_translation(delta, whole, frac);
    const Dims3 d = grid.dims();
    const FrequencyBank& bank = grid.bank();
    const std::size_t n = bank.size();
    BasicFieldGrid<Scalar> out(d, grid.channels(), bank);

    std::vector<double> alpha(n);
    bool any_rotation = false;
    for (std::size_t i = 0; i < n; ++i) {
        alpha[i] = dot(bank.omega(i), frac);
        any_rotation = any_rotation || alpha[i] != 0.0;
    }

    for (int t = 0; t < d.t; ++t) {
        for (int y = 0; y < d.h; ++y) {
            for (int x = 0; x < d.w; ++x) {
                const VoxelIndex src{std::clamp(t - whole.t, 0, d.t - 1), std::clamp(y - whole.y, 0, d.h - 1),
                                     std::clamp(x - whole.x, 0, d.w - 1)};
                const auto in = grid.voxel(src);
                auto dst = out.voxel({t, y, x});
                std::copy(in.begin(), in.end(), dst.begin());
                if (!any_rotation) {
                    continue;
                }
                for (int ch = 0; ch < grid.channels(); ++ch) {
                    for (std::size_t i = 0; i < n; ++i) {
                        Scalar* pair = dst.data() + (static_cast<std::size_t>(ch) * n + i) * 2;
                        double c = pair[0];
                        double dd = pair[1];
                        detail::rotate_pair(c, dd, alpha[i]);
                        pair[0] = static_cast<Scalar>(c);
                        pair[1] = static_cast<Scalar>(dd);
                    }
                }
            }
        }
    }
    return out;
}

template <typename Scalar>
BasicFieldGrid<Scalar> tile_global_field(const LocalField& field, const FrequencyBank& bank, Dims3 dims)
{
    BasicFieldGrid<Scalar> out(dims, field.channels(), bank);
    for (int t = 0; t < dims.t; ++t) {
        for (int y = 0; y < dims.h; ++y) {
            for (int x = 0; x < dims.w; ++x) {
                const Vec3 centre{static_cast<double>(x), static_cast<double>(y), static_cast<double>(t)};
                out.set_local_field({t, y, x}, phase_shift(field, bank, -1.0 * centre));
            }
        }
    }
    return out;
}

template class BasicFieldGrid<float>;
template class BasicFieldGrid<double>;

template std::vector<double> eval_grid_point(const FieldGrid&, Vec3, const PsfSpec&, const EvalOptions&);
template std::vector<double> eval_grid_point(const FieldGrid64&, Vec3, const PsfSpec&, const EvalOptions&);
template FieldGrid translate_grid(const FieldGrid&, Vec3);
template FieldGrid64 translate_grid(const FieldGrid64&, Vec3);
template FieldGrid tile_global_field<float>(const LocalField&, const FrequencyBank&, Dims3);
template FieldGrid64 tile_global_field<double>(const LocalField&, const FrequencyBank&, Dims3);

} // namespace vff
