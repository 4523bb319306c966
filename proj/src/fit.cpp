#include "vff/fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <tuple>

#include "vff/error.hpp"
#include "vff/parallel.hpp"
#include "vff/rng.hpp"

namespace vff {

void FitConfig::validate() const
{
    for (int e : {window.t, window.h, window.w}) {
        if (e < 1 || e % 2 == 0) {
            throw ConfigError("window extents must be odd and >= 1, got " + window.str());
        }
    }
    if (!(ridge_lambda >= 0.0) || !std::isfinite(ridge_lambda)) {
        throw ConfigError("ridge lambda must be finite and >= 0");
    }
    if (!(sample_weight_sigma > 0.0)) {
        throw ConfigError("sample weight sigma must be positive (or uniform)");
    }
}

void BankInitConfig::validate() const
{
    if (n_basis < 2) {
        throw ConfigError("a bank needs the dc entry plus at least one oscillatory term");
    }
    for (double w : {omega_max.x, omega_max.y, omega_max.t}) {
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw ConfigError("omega_max must be positive and finite");
        }
    }
}

namespace {

std::vector<Vec3> stratified_bank(const BankInitConfig& cfg)
{
    const std::size_t m = cfg.n_basis - 1;
    SplitMix64 rng(cfg.seed);
    const auto px = rng.permutation(m);
    const auto py = rng.permutation(m);
    const auto pt = rng.permutation(m);
    std::vector<Vec3> omegas;
    omegas.reserve(cfg.n_basis);
    omegas.push_back({});
    for (std::size_t k = 0; k < m; ++k) {
        const double ux = (static_cast<double>(px[k]) + rng.uniform()) / static_cast<double>(m);
        const double uy = (static_cast<double>(py[k]) + rng.uniform()) / static_cast<double>(m);
        const double ut = (static_cast<double>(pt[k]) + rng.uniform()) / static_cast<double>(m);
        Vec3 w{ux * cfg.omega_max.x, (2.0 * uy - 1.0) * cfg.omega_max.y, (2.0 * ut - 1.0) * cfg.omega_max.t};
        if (w.x == 0.0 && w.y == 0.0 && w.t == 0.0) {
            w.x = cfg.omega_max.x / static_cast<double>(2 * m); // measure-zero draw
        }
        omegas.push_back(w);
    }
    return omegas;
}

/// Frequencies are kept float32-representable so that field files store the
/// bank losslessly.
Vec3 to_float_grid(Vec3 w)
{
    return {static_cast<float>(w.x), static_cast<float>(w.y), static_cast<float>(w.t)};
}

std::vector<Vec3> lattice_bank(const BankInitConfig& cfg)
{
    const std::size_t need = cfg.n_basis - 1;
    int m = 1;
    // Half-space lattice {-m..m}^3 without the origin has ((2m+1)^3 - 1) / 2 points.
    while ((static_cast<std::size_t>(2 * m + 1) * (2 * m + 1) * (2 * m + 1) - 1) / 2 < need) {
        ++m;
    }
    std::vector<std::array<int, 3>> points;
    for (int i = 0; i <= m; ++i) {
        for (int j = -m; j <= m; ++j) {
            for (int k = -m; k <= m; ++k) {
                // canonical half space: first non-zero component positive
                const bool positive = i > 0 || (i == 0 && (j > 0 || (j == 0 && k > 0)));
                if (positive) {
                    points.push_back({i, j, k});
                }
            }
        }
    }
    std::stable_sort(points.begin(), points.end(), [](const auto& a, const auto& b) {
        return a[0] * a[0] + a[1] * a[1] + a[2] * a[2] < b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
    });
    std::vector<Vec3> omegas;
    omegas.reserve(cfg.n_basis);
    omegas.push_back({});
    for (std::size_t k = 0; k < need; ++k) {
        const auto& p = points[k];
        omegas.push_back({cfg.omega_max.x * p[0] / m, cfg.omega_max.y * p[1] / m, cfg.omega_max.t * p[2] / m});
    }
    return omegas;
}

// ---------------------------------------------------------------------------
// Window geometry

struct AxisWindow {
    int first = 0; // offset of the first sample relative to the centre
    int count = 0;
};

AxisWindow axis_window(int centre, int n, int extent, BorderMode mode)
{
    const int radius = extent / 2;
    if (mode == BorderMode::reflect) {
        return {-radius, extent};
    }
    if (extent >= n) {
        return {-centre, n};
    }
    const int start = std::clamp(centre - radius, 0, n - extent);
    return {start - centre, extent};
}

int reflect_index(int i, int n)
{
    if (n == 1) {
        return 0;
    }
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0) {
        i += period;
    }
    return i < n ? i : period - i;
}

struct WindowKey {
    std::array<AxisWindow, 3> axes; // t, y, x

    auto tie() const
    {
        return std::tuple(axes[0].first, axes[0].count, axes[1].first, axes[1].count, axes[2].first, axes[2].count);
    }
    friend bool operator<(const WindowKey& a, const WindowKey& b) { return a.tie() < b.tie(); }
};

WindowKey window_key(Dims3 dims, VoxelIndex c, const FitConfig& cfg)
{
    return {{axis_window(c.t, dims.t, cfg.window.t, cfg.border_mode),
             axis_window(c.y, dims.h, cfg.window.h, cfg.border_mode),
             axis_window(c.x, dims.w, cfg.window.w, cfg.border_mode)}};
}

std::vector<Vec3> window_offsets(const WindowKey& key)
{
    std::vector<Vec3> offsets;
    offsets.reserve(static_cast<std::size_t>(key.axes[0].count * key.axes[1].count * key.axes[2].count));
    for (int a = 0; a < key.axes[0].count; ++a) {
        for (int b = 0; b < key.axes[1].count; ++b) {
            for (int c = 0; c < key.axes[2].count; ++c) {
                offsets.push_back({static_cast<double>(key.axes[2].first + c), static_cast<double>(key.axes[1].first + b),
                                   static_cast<double>(key.axes[0].first + a)});
            }
        }
    }
    return offsets;
}

/// Copies the window samples of `centre` (channel-major columns) into dst.
void gather_window(const VideoBuffer& video, VoxelIndex centre, const WindowKey& key, BorderMode mode,
                   double* dst, Eigen::Index stride)
{
    const Dims3 d = video.dims();
    Eigen::Index row = 0;
    for (int a = 0; a < key.axes[0].count; ++a) {
        int t = centre.t + key.axes[0].first + a;
        for (int b = 0; b < key.axes[1].count; ++b) {
            int y = centre.y + key.axes[1].first + b;
            for (int c = 0; c < key.axes[2].count; ++c) {
                int x = centre.x + key.axes[2].first + c;
                const int tt = mode == BorderMode::reflect ? reflect_index(t, d.t) : t;
                const int yy = mode == BorderMode::reflect ? reflect_index(y, d.h) : y;
                const int xx = mode == BorderMode::reflect ? reflect_index(x, d.w) : x;
                for (int ch = 0; ch < video.channels(); ++ch) {
                    dst[ch * stride + row] = video.at(tt, yy, xx, ch);
                }
                ++row;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Ridge solver

/// Maps window samples to the stacked unknowns: the sine coefficients of the
/// non-DC entries followed by all cosine coefficients.
struct RidgeSolver {
    Eigen::MatrixXd projector; // unknowns x samples
    std::vector<std::pair<std::size_t, bool>> unknowns; // (basis index, is cosine)
};

std::string voxel_name(VoxelIndex v)
{
    return "(t=" + std::to_string(v.t) + ", y=" + std::to_string(v.y) + ", x=" + std::to_string(v.x) + ")";
}

RidgeSolver make_solver(const FrequencyBank& bank, const std::vector<Vec3>& offsets, const FitConfig& cfg,
                        VoxelIndex example)
{
    const std::size_t n = bank.size();
    RidgeSolver solver;
    std::vector<Eigen::Index> columns;
    for (std::size_t i = 0; i < n; ++i) {
        if (i != bank.dc_index()) {
            solver.unknowns.emplace_back(i, false);
            columns.push_back(static_cast<Eigen::Index>(i));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        solver.unknowns.emplace_back(i, true);
        columns.push_back(static_cast<Eigen::Index>(n + i));
    }
    const Eigen::MatrixXd full = design_matrix(bank, offsets);
    const auto samples = static_cast<Eigen::Index>(offsets.size());
    const auto k = static_cast<Eigen::Index>(columns.size());
    Eigen::MatrixXd m(samples, k);
    for (Eigen::Index j = 0; j < k; ++j) {
        m.col(j) = full.col(columns[static_cast<std::size_t>(j)]);
    }

    Eigen::VectorXd weights(samples);
    for (Eigen::Index s = 0; s < samples; ++s) {
        const Vec3 u = offsets[static_cast<std::size_t>(s)];
        weights(s) = cfg.sample_weight_sigma == kUniformWeights
                         ? 1.0
                         : std::exp(-dot(u, u) / (2.0 * cfg.sample_weight_sigma * cfg.sample_weight_sigma));
    }

    if (cfg.ridge_lambda > 0.0) {
        const Eigen::MatrixXd mtw = m.transpose() * weights.asDiagonal();
        Eigen::MatrixXd normal = mtw * m;
        const Eigen::Index dc_cos = k - static_cast<Eigen::Index>(n) + static_cast<Eigen::Index>(bank.dc_index());
        for (Eigen::Index j = 0; j < k; ++j) {
            if (j != dc_cos) {
                normal(j, j) += cfg.ridge_lambda;
            }
        }
        Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
            throw RankDeficiencyError("ridge normal matrix is not positive definite at voxel " + voxel_name(example));
        }
        solver.projector = ldlt.solve(mtw);
    } else {
        const Eigen::VectorXd root = weights.cwiseSqrt();
        const Eigen::MatrixXd weighted = root.asDiagonal() * m;
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(weighted);
        qr.setThreshold(1e-10);
        if (qr.rank() < k) {
            throw RankDeficiencyError("design matrix has rank " + std::to_string(qr.rank()) + " < " +
                                      std::to_string(k) + " unknowns at voxel " + voxel_name(example));
        }
        const Eigen::MatrixXd rhs = root.asDiagonal().toDenseMatrix();
        solver.projector = qr.solve(rhs);
    }
    return solver;
}

template <typename Out>
void scatter_solution(const RidgeSolver& solver, const double* z, std::size_t n_basis, int channel, Out&& store)
{
    for (std::size_t k = 0; k < solver.unknowns.size(); ++k) {
        const auto [i, is_cos] = solver.unknowns[k];
        store((static_cast<std::size_t>(channel) * n_basis + i) * 2 + (is_cos ? 1 : 0), z[k]);
    }
}

void check_inputs(const VideoBuffer& video, const FrequencyBank& bank, const FitConfig& cfg)
{
    cfg.validate();
    if (video.empty() || video.dims().empty()) {
        throw ConfigError("cannot fit an empty video");
    }
    (void)bank;
}

} // namespace

FrequencyBank init_bank(const BankInitConfig& cfg)
{
    cfg.validate();
    auto omegas = cfg.strategy == BankStrategy::axis_grid ? lattice_bank(cfg) : stratified_bank(cfg);
    for (Vec3& w : omegas) {
        w = to_float_grid(w);
    }
    return FrequencyBank(std::move(omegas), 0);
}

Eigen::MatrixXd design_matrix(const FrequencyBank& bank, std::span<const Vec3> offsets)
{
    const auto n = static_cast<Eigen::Index>(bank.size());
    Eigen::MatrixXd m(static_cast<Eigen::Index>(offsets.size()), 2 * n);
    for (std::size_t r = 0; r < offsets.size(); ++r) {
        if (!is_finite(offsets[r])) {
            throw DomainError("design offsets must be finite");
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            const double theta = dot(bank.omega(static_cast<std::size_t>(i)), offsets[r]);
            m(static_cast<Eigen::Index>(r), i) = std::sin(theta);
            m(static_cast<Eigen::Index>(r), n + i) = std::cos(theta);
        }
    }
    return m;
}

LocalField fit_voxel(const VideoBuffer& video, VoxelIndex center, const FrequencyBank& bank, const FitConfig& cfg)
{
    check_inputs(video, bank, cfg);
    if (!contains(video.dims(), center)) {
        throw DomainError("voxel " + voxel_name(center) + " outside video " + video.dims().str());
    }
    const WindowKey key = window_key(video.dims(), center, cfg);
    const RidgeSolver solver = make_solver(bank, window_offsets(key), cfg, center);
    const Eigen::Index samples = solver.projector.cols();
    Eigen::MatrixXd values(samples, video.channels());
    gather_window(video, center, key, cfg.border_mode, values.data(), samples);
    const Eigen::MatrixXd z = solver.projector * values;
    LocalField field(video.channels(), bank.size());
    for (int ch = 0; ch < video.channels(); ++ch) {
        scatter_solution(solver, z.col(ch).data(), bank.size(), ch,
                         [&](std::size_t slot, double v) { field.data()[slot] = v; });
    }
    return field;
}

template <typename Scalar>
BasicFieldGrid<Scalar> fit_video(const VideoBuffer& video, const FrequencyBank& bank, const FitConfig& cfg)
{
    check_inputs(video, bank, cfg);
    const Dims3 d = video.dims();
    const int channels = video.channels();

    std::map<WindowKey, std::vector<VoxelIndex>> groups;
    for (int t = 0; t < d.t; ++t) {
        for (int y = 0; y < d.h; ++y) {
            for (int x = 0; x < d.w; ++x) {
                groups[window_key(d, {t, y, x}, cfg)].push_back({t, y, x});
            }
        }
    }
    std::vector<const WindowKey*> keys;
    std::vector<const std::vector<VoxelIndex>*> members;
    for (const auto& [key, voxels] : groups) {
        keys.push_back(&key);
        members.push_back(&voxels);
    }
    std::vector<RidgeSolver> solvers(keys.size());
    parallel_for(keys.size(), cfg.threads, [&](std::size_t g) {
        solvers[g] = make_solver(bank, window_offsets(*keys[g]), cfg, members[g]->front());
    });

    struct Task {
        std::size_t group;
        std::size_t begin;
        std::size_t end;
    };
    std::vector<Task> tasks;
    for (std::size_t g = 0; g < keys.size(); ++g) {
        const auto samples = static_cast<std::size_t>(solvers[g].projector.cols());
        const std::size_t chunk = std::max<std::size_t>(1, (std::size_t{1} << 20) / (samples * channels));
        for (std::size_t b = 0; b < members[g]->size(); b += chunk) {
            tasks.push_back({g, b, std::min(b + chunk, members[g]->size())});
        }
    }

    BasicFieldGrid<Scalar> grid(d, channels, bank);
    parallel_for(tasks.size(), cfg.threads, [&](std::size_t k) {
        const Task& task = tasks[k];
        const RidgeSolver& solver = solvers[task.group];
        const auto& voxels = *members[task.group];
        const Eigen::Index samples = solver.projector.cols();
        const auto count = static_cast<Eigen::Index>(task.end - task.begin);
        Eigen::MatrixXd values(samples, count * channels);
        for (Eigen::Index v = 0; v < count; ++v) {
            gather_window(video, voxels[task.begin + static_cast<std::size_t>(v)], *keys[task.group], cfg.border_mode,
                          values.col(v * channels).data(), samples);
        }
        const Eigen::MatrixXd z = solver.projector * values;
        for (Eigen::Index v = 0; v < count; ++v) {
            auto block = grid.voxel(voxels[task.begin + static_cast<std::size_t>(v)]);
            for (int ch = 0; ch < channels; ++ch) {
                scatter_solution(solver, z.col(v * channels + ch).data(), bank.size(), ch,
                                 [&](std::size_t slot, double value) { block[slot] = static_cast<Scalar>(value); });
            }
        }
    });
    return grid;
}

template FieldGrid fit_video<float>(const VideoBuffer&, const FrequencyBank&, const FitConfig&);
template FieldGrid64 fit_video<double>(const VideoBuffer&, const FrequencyBank&, const FitConfig&);

} // namespace vff
