#include "vff/sampler.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "vff/error.hpp"
#include "vff/parallel.hpp"

namespace vff {

SampleSpec SampleSpec::make(Dims3 input, double s, double r)
{
    if (!(s > 0.0) || !(r > 0.0) || !std::isfinite(s) || !std::isfinite(r)) {
        throw ConfigError("scale factors must be positive and finite");
    }
    if (input.empty()) {
        throw ConfigError("cannot sample an empty grid");
    }
    SampleSpec spec;
    spec.input = input;
    spec.spatial_scale = s;
    spec.temporal_scale = r;
    spec.output = {static_cast<int>(std::lround(r * input.t)), static_cast<int>(std::lround(s * input.h)),
                   static_cast<int>(std::lround(s * input.w))};
    if (spec.output.empty()) {
        throw ConfigError("output dims " + spec.output.str() + " are empty");
    }
    return spec;
}

namespace {

void check_spec(Dims3 grid_dims, const SampleSpec& spec)
{
    if (!(grid_dims == spec.input)) {
        throw DomainError("sample spec was built for " + spec.input.str() + " but the grid is " + grid_dims.str());
    }
}

/// Output samples of one axis grouped by the voxel they fall in. Voxels whose
/// offset lists agree (to 2^-40 samples) share a key.
struct AxisPlan {
    std::vector<std::vector<int>> outputs;       // per input cell: output indices
    std::vector<int> key;                        // per input cell, -1 if unused
    std::vector<std::vector<double>> key_offsets; // representative offsets per key
};

template <typename CoordFn>
AxisPlan plan_axis(int n_out, int n_in, double slack, CoordFn coord)
{
    AxisPlan plan;
    plan.outputs.resize(static_cast<std::size_t>(n_in));
    plan.key.assign(static_cast<std::size_t>(n_in), -1);
    std::vector<std::vector<double>> offsets(static_cast<std::size_t>(n_in));
    for (int o = 0; o < n_out; ++o) {
        const AxisLocation loc = locate_axis(coord(o), n_in, slack);
        plan.outputs[static_cast<std::size_t>(loc.index)].push_back(o);
        offsets[static_cast<std::size_t>(loc.index)].push_back(loc.offset);
    }
    std::map<std::vector<std::int64_t>, int> ids;
    for (int j = 0; j < n_in; ++j) {
        const auto& offs = offsets[static_cast<std::size_t>(j)];
        if (offs.empty()) {
            continue;
        }
        std::vector<std::int64_t> q(offs.size());
        for (std::size_t k = 0; k < offs.size(); ++k) {
            q[k] = std::llround(std::ldexp(offs[k], 40));
        }
        auto [it, inserted] = ids.emplace(std::move(q), static_cast<int>(plan.key_offsets.size()));
        if (inserted) {
            plan.key_offsets.push_back(offs);
        }
        plan.key[static_cast<std::size_t>(j)] = it->second;
    }
    return plan;
}

struct VoxelGroup {
    Eigen::MatrixXd design; // rows: (t, y, x) offset combos; cols: interleaved (sin, cos) per basis
    std::vector<VoxelIndex> voxels;
    const std::vector<double>* ut = nullptr;
    const std::vector<double>* uy = nullptr;
    const std::vector<double>* ux = nullptr;
};

Eigen::MatrixXd group_design(const FrequencyBank& bank, std::span<const double> atten, const std::vector<double>& ut,
                             const std::vector<double>& uy, const std::vector<double>& ux)
{
    const auto n = static_cast<Eigen::Index>(bank.size());
    Eigen::MatrixXd design(static_cast<Eigen::Index>(ut.size() * uy.size() * ux.size()), 2 * n);
    Eigen::Index row = 0;
    for (double t : ut) {
        for (double y : uy) {
            for (double x : ux) {
                const Vec3 u{x, y, t};
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double theta = dot(bank.omega(static_cast<std::size_t>(i)), u);
                    design(row, 2 * i) = atten[static_cast<std::size_t>(i)] * std::sin(theta);
                    design(row, 2 * i + 1) = atten[static_cast<std::size_t>(i)] * std::cos(theta);
                }
                ++row;
            }
        }
    }
    return design;
}

} // namespace

template <typename Scalar>
VideoBuffer sample_grid(const BasicFieldGrid<Scalar>& grid, const SampleSpec& spec, const PsfSpec& psf,
                        const SampleOptions& options)
{
    if (options.eval.crossfade_margin > 0.0) {
        return sample_grid_naive(grid, spec, psf, options);
    }
    psf.validate();
    check_spec(grid.dims(), spec);
    const Dims3 in = grid.dims();
    const Dims3 out_dims = spec.output;
    const int channels = grid.channels();
    const std::vector<double> atten = detail::attenuation_table(grid.bank(), psf);

    const AxisPlan pt = plan_axis(out_dims.t, in.t, SampleSpec::kTemporalSlack, [&](int o) { return spec.t_coord(o); });
    const AxisPlan py = plan_axis(out_dims.h, in.h, 0.0, [&](int o) { return spec.y_coord(o); });
    const AxisPlan px = plan_axis(out_dims.w, in.w, 0.0, [&](int o) { return spec.x_coord(o); });

    std::map<std::array<int, 3>, std::size_t> group_of;
    std::vector<VoxelGroup> groups;
    for (int t = 0; t < in.t; ++t) {
        const int kt = pt.key[static_cast<std::size_t>(t)];
        if (kt < 0) {
            continue;
        }
        for (int y = 0; y < in.h; ++y) {
            const int ky = py.key[static_cast<std::size_t>(y)];
            if (ky < 0) {
                continue;
            }
            for (int x = 0; x < in.w; ++x) {
                const int kx = px.key[static_cast<std::size_t>(x)];
                if (kx < 0) {
                    continue;
                }
                auto [it, inserted] = group_of.emplace(std::array<int, 3>{kt, ky, kx}, groups.size());
                if (inserted) {
                    VoxelGroup g;
                    g.ut = &pt.key_offsets[static_cast<std::size_t>(kt)];
                    g.uy = &py.key_offsets[static_cast<std::size_t>(ky)];
                    g.ux = &px.key_offsets[static_cast<std::size_t>(kx)];
                    groups.push_back(std::move(g));
                }
                groups[it->second].voxels.push_back({t, y, x});
            }
        }
    }

    parallel_for(groups.size(), options.threads, [&](std::size_t g) {
        groups[g].design = group_design(grid.bank(), atten, *groups[g].ut, *groups[g].uy, *groups[g].ux);
    });

    // Work items: fixed-size voxel chunks of each group.
    const std::size_t rows_per_voxel = 2 * grid.n_basis();
    const std::size_t chunk = std::max<std::size_t>(1, (std::size_t{1} << 20) / (rows_per_voxel * channels));
    struct Task {
        std::size_t group;
        std::size_t begin;
        std::size_t end;
    };
    std::vector<Task> tasks;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        for (std::size_t b = 0; b < groups[g].voxels.size(); b += chunk) {
            tasks.push_back({g, b, std::min(b + chunk, groups[g].voxels.size())});
        }
    }

    VideoBuffer out(out_dims, channels);
    parallel_for(tasks.size(), options.threads, [&](std::size_t k) {
        const Task& task = tasks[k];
        const VoxelGroup& group = groups[task.group];
        const auto count = static_cast<Eigen::Index>(task.end - task.begin);
        Eigen::MatrixXd coeffs(static_cast<Eigen::Index>(rows_per_voxel), count * channels);
        for (Eigen::Index v = 0; v < count; ++v) {
            const auto block = grid.voxel(group.voxels[task.begin + static_cast<std::size_t>(v)]);
            // The voxel block is C columns of 2N interleaved (c, d) values.
            for (int ch = 0; ch < channels; ++ch) {
                const Scalar* src = block.data() + static_cast<std::size_t>(ch) * rows_per_voxel;
                double* dst = coeffs.col(v * channels + ch).data();
                for (std::size_t r = 0; r < rows_per_voxel; ++r) {
                    dst[r] = static_cast<double>(src[r]);
                }
            }
        }
        const Eigen::MatrixXd values = group.design * coeffs;
        for (Eigen::Index v = 0; v < count; ++v) {
            const VoxelIndex j = group.voxels[task.begin + static_cast<std::size_t>(v)];
            const auto& ot = pt.outputs[static_cast<std::size_t>(j.t)];
            const auto& oy = py.outputs[static_cast<std::size_t>(j.y)];
            const auto& ox = px.outputs[static_cast<std::size_t>(j.x)];
            Eigen::Index row = 0;
            for (int tau : ot) {
                for (int i : oy) {
                    for (int kk : ox) {
                        for (int ch = 0; ch < channels; ++ch) {
                            out.at(tau, i, kk, ch) = values(row, v * channels + ch);
                        }
                        ++row;
                    }
                }
            }
        }
    });
    return out;
}

template <typename Scalar>
VideoBuffer sample_grid_naive_frames(const BasicFieldGrid<Scalar>& grid, const SampleSpec& spec, const PsfSpec& psf,
                                     int first, int count, const SampleOptions& options)
{
    psf.validate();
    check_spec(grid.dims(), spec);
    if (first < 0 || count < 0 || first + count > spec.output.t) {
        throw DomainError("frame range outside the output");
    }
    const Dims3 in = grid.dims();
    const Dims3 out_dims{count, spec.output.h, spec.output.w};
    const std::vector<double> atten = detail::attenuation_table(grid.bank(), psf);
    VideoBuffer out(out_dims, grid.channels());
    parallel_for(static_cast<std::size_t>(count), options.threads, [&](std::size_t f) {
        const int tau = first + static_cast<int>(f);
        const AxisLocation lt = locate_axis(spec.t_coord(tau), in.t, SampleSpec::kTemporalSlack);
        std::vector<double> value(static_cast<std::size_t>(grid.channels()));
        for (int i = 0; i < out_dims.h; ++i) {
            const AxisLocation ly = locate_axis(spec.y_coord(i), in.h);
            for (int k = 0; k < out_dims.w; ++k) {
                const AxisLocation lx = locate_axis(spec.x_coord(k), in.w);
                const Location loc{{lt.index, ly.index, lx.index}, {lx.offset, ly.offset, lt.offset}};
                detail::eval_located(grid, loc, atten, options.eval, value.data());
                for (int ch = 0; ch < grid.channels(); ++ch) {
                    out.at(static_cast<int>(f), i, k, ch) = value[static_cast<std::size_t>(ch)];
                }
            }
        }
    });
    return out;
}

template <typename Scalar>
VideoBuffer sample_grid_naive(const BasicFieldGrid<Scalar>& grid, const SampleSpec& spec, const PsfSpec& psf,
                              const SampleOptions& options)
{
    return sample_grid_naive_frames(grid, spec, psf, 0, spec.output.t, options);
}

template VideoBuffer sample_grid(const FieldGrid&, const SampleSpec&, const PsfSpec&, const SampleOptions&);
template VideoBuffer sample_grid(const FieldGrid64&, const SampleSpec&, const PsfSpec&, const SampleOptions&);
template VideoBuffer sample_grid_naive(const FieldGrid&, const SampleSpec&, const PsfSpec&, const SampleOptions&);
template VideoBuffer sample_grid_naive(const FieldGrid64&, const SampleSpec&, const PsfSpec&, const SampleOptions&);
template VideoBuffer sample_grid_naive_frames(const FieldGrid&, const SampleSpec&, const PsfSpec&, int, int,
                                              const SampleOptions&);
template VideoBuffer sample_grid_naive_frames(const FieldGrid64&, const SampleSpec&, const PsfSpec&, int, int,
                                              const SampleOptions&);

} // namespace vff
