#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <tuple>

#include "oracles.hpp"
#include "vff/error.hpp"
#include "vff/fit.hpp"
#include "vff/sampler.hpp"

using namespace vff;
using vff::test::random_field;

namespace {

constexpr double pi = std::numbers::pi;

/// Video whose every sample is one global expansion evaluated at the sample
/// position, so every window sees data the bank represents exactly.
VideoBuffer render_global(const LocalField& f, const FrequencyBank& bank, Dims3 dims)
{
    VideoBuffer v(dims, f.channels());
    for (int t = 0; t < dims.t; ++t)
        for (int y = 0; y < dims.h; ++y)
            for (int x = 0; x < dims.w; ++x) {
                const auto val = test::naive_eval(f, bank, {double(x), double(y), double(t)}, PsfSpec::point());
                for (int c = 0; c < f.channels(); ++c) v.at(t, y, x, c) = val[static_cast<std::size_t>(c)];
            }
    return v;
}

VideoBuffer random_video(SplitMix64& rng, Dims3 dims, int channels = 3)
{
    VideoBuffer v(dims, channels);
    for (double& x : v.data()) x = rng.uniform();
    return v;
}

double osc_norm(const LocalField& f, const FrequencyBank& bank)
{
    double s = 0.0;
    for (int ch = 0; ch < f.channels(); ++ch)
        for (std::size_t i = 0; i < bank.size(); ++i) {
            if (i == bank.dc_index()) continue;
            s += f.c(ch, i) * f.c(ch, i) + f.d(ch, i) * f.d(ch, i);
        }
    return std::sqrt(s);
}

BankInitConfig small_bank(std::size_t n, double wmax, std::uint64_t seed = 1)
{
    BankInitConfig b;
    b.n_basis = n;
    b.omega_max = {wmax, wmax, wmax};
    b.seed = seed;
    return b;
}

FitConfig exact_cfg(Dims3 window)
{
    FitConfig cfg;
    cfg.window = window;
    cfg.ridge_lambda = 0.0;
    cfg.sample_weight_sigma = kUniformWeights;
    cfg.border_mode = BorderMode::clamp;
    return cfg;
}

double max_rel_coeff_err(std::span<const double> got, std::span<const double> want)
{
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < got.size(); ++k) {
        num += (got[k] - want[k]) * (got[k] - want[k]);
        den += want[k] * want[k];
    }
    return std::sqrt(num / den);
}

} // namespace

TEST_CASE("init_bank")
{
    BankInitConfig cfg;
    cfg.n_basis = 2;
    const auto two = init_bank(cfg);
    REQUIRE(two.size() == 2);
    CHECK(two.omega(0) == Vec3{0, 0, 0});
    CHECK_FALSE(two.omega(1) == Vec3{0, 0, 0});

    cfg.n_basis = 512;
    cfg.seed = 42;
    const auto a = init_bank(cfg);
    CHECK(a == init_bank(cfg));
    cfg.seed = 43;
    CHECK_FALSE(a == init_bank(cfg));

    int zeros = 0;
    for (Vec3 w : a.omegas()) {
        REQUIRE(std::abs(w.x) <= 4 * pi);
        REQUIRE(std::abs(w.y) <= 4 * pi);
        REQUIRE(std::abs(w.t) <= 4 * pi);
        REQUIRE(w.x >= 0.0);
        REQUIRE(double(float(w.y)) == w.y);
        if (w == Vec3{0, 0, 0}) ++zeros;
    }
    CHECK(zeros == 1);
    CHECK(a.dc_index() == 0);

    // one draw per stratum on every axis, up to rounding at stratum edges
    std::set<long> sx, sy, st;
    for (std::size_t i = 1; i < a.size(); ++i) {
        const Vec3 w = a.omega(i);
        sx.insert(std::lround(std::floor(w.x / (4 * pi) * 511)));
        sy.insert(std::lround(std::floor((w.y / (4 * pi) + 1) / 2 * 511)));
        st.insert(std::lround(std::floor((w.t / (4 * pi) + 1) / 2 * 511)));
    }
    CHECK(sx.size() >= 505);
    CHECK(sy.size() >= 505);
    CHECK(st.size() >= 505);

    BankInitConfig grid;
    grid.n_basis = 14;
    grid.strategy = BankStrategy::axis_grid;
    grid.omega_max = {1, 2, 3};
    const auto lattice = init_bank(grid);
    CHECK(lattice.size() == 14);
    std::set<std::tuple<double, double, double>> seen;
    for (Vec3 w : lattice.omegas()) {
        CHECK(std::abs(w.x) <= 1);
        CHECK(std::abs(w.y) <= 2);
        CHECK(std::abs(w.t) <= 3);
        seen.insert({w.x, w.y, w.t});
        // never both w and -w
        if (!(w == Vec3{0, 0, 0})) CHECK(seen.count({-w.x, -w.y, -w.t}) == 0);
    }
    CHECK(seen.size() == 14);

    BankInitConfig bad;
    bad.n_basis = 1;
    CHECK_THROWS_AS(init_bank(bad), ConfigError);
    bad.n_basis = 4;
    bad.omega_max = {0, 1, 1};
    CHECK_THROWS_AS(init_bank(bad), ConfigError);
}

TEST_CASE("design_matrix")
{
    SplitMix64 rng(31);
    const auto bank = test::random_bank(rng, 9, 2 * pi);
    const std::vector<Vec3> zero{{0, 0, 0}};
    const auto m0 = design_matrix(bank, zero);
    for (int i = 0; i < 9; ++i) {
        CHECK(m0(0, i) == 0.0);
        CHECK(m0(0, 9 + i) == 1.0);
    }

    const FrequencyBank one({{0, 0, 0}, {pi, 0, 0}}, 0);
    const std::vector<Vec3> half{{0.5, 0, 0}};
    const auto m1 = design_matrix(one, half);
    CHECK(m1(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(m1(0, 3)) <= 1e-12);

    std::vector<Vec3> offsets;
    for (int k = 0; k < 50; ++k) offsets.push_back(test::random_vec(rng, -4, 4));
    const auto m = design_matrix(bank, offsets);
    const auto f = random_field(rng, 1, 9);
    Eigen::VectorXd z(18);
    for (int i = 0; i < 9; ++i) {
        z(i) = f.c(0, i);
        z(9 + i) = f.d(0, i);
    }
    const Eigen::VectorXd v = m * z;
    for (int k = 0; k < 50; ++k) {
        const double want = eval_local(f, bank, offsets[k])[0];
        REQUIRE(std::abs(v(k) - want) <= 1e-10 * std::max(1.0, std::abs(want)));
    }
    CHECK_THROWS_AS(design_matrix(bank, std::vector<Vec3>{{NAN, 0, 0}}), DomainError);
}

TEST_CASE("fit_voxel")
{
    SplitMix64 rng(37);
    const auto bank = init_bank(small_bank(32, 2.0));

    SUBCASE("constant video goes to the dc term")
    {
        const VideoBuffer flat({5, 9, 9}, 3, 0.5);
        FitConfig cfg;
        const auto f = fit_voxel(flat, {2, 4, 4}, bank, cfg);
        for (int ch = 0; ch < 3; ++ch) {
            CHECK(f.d(ch, 0) == doctest::Approx(0.5).epsilon(1e-12));
            CHECK(f.c(ch, 0) == 0.0);
            for (std::size_t i = 1; i < bank.size(); ++i) {
                REQUIRE(std::abs(f.c(ch, i)) <= 1e-6);
                REQUIRE(std::abs(f.d(ch, i)) <= 1e-6);
            }
        }
    }

    SUBCASE("all-zero video")
    {
        const VideoBuffer zero({3, 6, 6}, 3, 0.0);
        const auto f = fit_voxel(zero, {1, 2, 3}, bank, FitConfig{});
        for (double v : f.data()) CHECK(v == 0.0);
    }

    SUBCASE("exact recovery at zero ridge")
    {
        const auto small = init_bank(small_bank(8, 2.5, 5));
        auto global = random_field(rng, 3, 8, 0.3);
        for (int ch = 0; ch < 3; ++ch) global.c(ch, 0) = 0.0; // sin(0) carries nothing
        const Dims3 dims{5, 9, 9};
        const auto video = render_global(global, small, dims);
        const auto cfg = exact_cfg({3, 5, 5}); // 75 samples for 15 unknowns
        for (VoxelIndex c : {VoxelIndex{2, 4, 4}, VoxelIndex{0, 0, 0}, VoxelIndex{4, 8, 1}}) {
            const auto f = fit_voxel(video, c, small, cfg);
            const auto want = phase_shift(global, small, Vec3{-double(c.x), -double(c.y), -double(c.t)});
            CHECK(max_rel_coeff_err(f.data(), want.data()) <= 1e-6);
        }
    }

    SUBCASE("singular system at zero ridge names the voxel")
    {
        const auto video = random_video(rng, {3, 3, 3});
        auto cfg = exact_cfg({1, 1, 1});
        try {
            (void)fit_voxel(video, {1, 2, 0}, bank, cfg);
            FAIL("expected a rank deficiency");
        } catch (const RankDeficiencyError& e) {
            CHECK(std::string(e.what()).find("t=1, y=2, x=0") != std::string::npos);
        }
    }

    SUBCASE("config validation")
    {
        const auto video = random_video(rng, {3, 3, 3});
        FitConfig cfg;
        cfg.window = {2, 3, 3};
        CHECK_THROWS_AS(fit_voxel(video, {0, 0, 0}, bank, cfg), ConfigError);
        cfg.window = {3, 3, 3};
        cfg.ridge_lambda = -1;
        CHECK_THROWS_AS(fit_voxel(video, {0, 0, 0}, bank, cfg), ConfigError);
        CHECK_THROWS_AS(fit_voxel(video, {3, 0, 0}, bank, FitConfig{}), DomainError);
        CHECK_THROWS_AS(fit_video(VideoBuffer{}, bank, FitConfig{}), ConfigError);
    }
}

TEST_CASE("fit_video")
{
    SplitMix64 rng(41);

    SUBCASE("single voxel")
    {
        const auto bank = init_bank(small_bank(16, 3.0));
        const VideoBuffer one({1, 1, 1}, 3, 0.37);
        const auto g = fit_video(one, bank, FitConfig{});
        for (int ch = 0; ch < 3; ++ch) CHECK(g.local_field({0, 0, 0}).d(ch, 0) == doctest::Approx(0.37).epsilon(1e-6));
    }

    SUBCASE("matches per-voxel fits and is order independent")
    {
        const auto bank = init_bank(small_bank(24, 3.0));
        const auto video = random_video(rng, {4, 7, 6});
        FitConfig cfg;
        cfg.window = {3, 5, 5};
        for (BorderMode mode : {BorderMode::reflect, BorderMode::clamp}) {
            cfg.border_mode = mode;
            cfg.threads = 1;
            const auto serial = fit_video<double>(video, bank, cfg);
            cfg.threads = 3;
            const auto parallel = fit_video<double>(video, bank, cfg);
            CHECK(serial == parallel);
            CHECK(fit_video<double>(video, bank, cfg) == parallel);
            for (VoxelIndex v : {VoxelIndex{0, 0, 0}, VoxelIndex{3, 6, 5}, VoxelIndex{1, 3, 2}, VoxelIndex{2, 0, 5}}) {
                const auto f = fit_voxel(video, v, bank, cfg);
                const auto g = serial.local_field(v);
                for (std::size_t k = 0; k < f.data().size(); ++k) REQUIRE(std::abs(f.data()[k] - g.data()[k]) < 1e-12);
            }
        }
    }

    SUBCASE("round trip of bank-generated video")
    {
        const auto bank = init_bank(small_bank(16, 2.5, 9));
        auto global = random_field(rng, 3, 16, 0.1);
        for (int ch = 0; ch < 3; ++ch) global.c(ch, 0) = 0.0;
        const Dims3 dims{8, 16, 16};
        auto video = render_global(global, bank, dims);
        const auto grid = fit_video<double>(video, bank, exact_cfg({5, 7, 7}));
        const auto rec = sample_grid(grid, SampleSpec::make(dims, 1, 1), PsfSpec::point());
        double mse = 0.0;
        for (std::size_t k = 0; k < rec.data().size(); ++k) {
            mse += std::pow(rec.data()[k] - video.data()[k], 2);
        }
        mse /= double(rec.data().size());
        CHECK(10 * std::log10(1.0 / mse) >= 60.0);
    }
}

TEST_CASE("fit properties")
{
    SplitMix64 rng(43);
    const auto bank = init_bank(small_bank(20, 3.0, 2));
    const auto video = random_video(rng, {3, 7, 7});

    SUBCASE("value scaling")
    {
        for (double lambda : {0.0, 1e-3}) {
            FitConfig cfg;
            cfg.window = {3, 5, 5};
            cfg.ridge_lambda = lambda;
            const auto a = fit_video<double>(video, bank, cfg);
            VideoBuffer scaled = video;
            for (double& v : scaled.data()) v *= -2.5;
            const auto b = fit_video<double>(scaled, bank, cfg);
            for (std::size_t k = 0; k < a.coeffs().size(); ++k) {
                REQUIRE(std::abs(b.coeffs()[k] + 2.5 * a.coeffs()[k]) <= 1e-8);
            }
        }
    }

    SUBCASE("ridge shrinks the oscillatory norm")
    {
        FitConfig cfg;
        cfg.window = {3, 5, 5};
        for (VoxelIndex v : {VoxelIndex{1, 3, 3}, VoxelIndex{0, 0, 6}}) {
            double prev = INFINITY;
            for (double lambda : {1e-8, 1e-6, 1e-4, 1e-3, 1e-2, 0.1, 1.0, 10.0}) {
                cfg.ridge_lambda = lambda;
                const double n = osc_norm(fit_voxel(video, v, bank, cfg), bank);
                REQUIRE(n <= prev * (1 + 1e-12));
                prev = n;
            }
        }
    }

    SUBCASE("reflect borders respect mirror symmetry")
    {
        BankInitConfig bc;
        bc.n_basis = 14;
        bc.strategy = BankStrategy::axis_grid;
        bc.omega_max = {1.1, 0.9, 0.7};
        const auto lattice = init_bank(bc);
        // bank entry of the x-mirrored frequency and the sign it picks up
        std::vector<std::pair<std::size_t, double>> mirror(lattice.size());
        for (std::size_t i = 0; i < lattice.size(); ++i) {
            const Vec3 w = lattice.omega(i);
            const Vec3 m{-w.x, w.y, w.t};
            for (std::size_t j = 0; j < lattice.size(); ++j) {
                if (lattice.omega(j) == m) mirror[i] = {j, 1.0};
                if (lattice.omega(j) == Vec3{-m.x, -m.y, -m.t}) mirror[i] = {j, -1.0};
            }
        }
        FitConfig cfg;
        cfg.window = {3, 5, 5};
        cfg.border_mode = BorderMode::reflect;
        const auto v = random_video(rng, {3, 6, 7});
        const auto a = fit_video<double>(v, lattice, cfg);
        const auto b = fit_video<double>(flip_x(v), lattice, cfg);
        const int w = v.width();
        for (int t = 0; t < 3; ++t)
            for (int y = 0; y < 6; ++y)
                for (int x = 0; x < w; ++x) {
                    const auto fa = a.local_field({t, y, x});
                    const auto fb = b.local_field({t, y, w - 1 - x});
                    for (int ch = 0; ch < 3; ++ch)
                        for (std::size_t i = 0; i < lattice.size(); ++i) {
                            const auto [j, sign] = mirror[i];
                            REQUIRE(std::abs(fb.c(ch, j) - sign * fa.c(ch, i)) <= 1e-8);
                            REQUIRE(std::abs(fb.d(ch, j) - fa.d(ch, i)) <= 1e-8);
                        }
                }

        // a video that is itself mirror symmetric gives a self-mirrored grid
        VideoBuffer sym = v;
        for (int t = 0; t < 3; ++t)
            for (int y = 0; y < 6; ++y)
                for (int x = 0; x < w; ++x)
                    for (int ch = 0; ch < 3; ++ch) sym.at(t, y, x, ch) = v.at(t, y, std::min(x, w - 1 - x), ch);
        const auto s = fit_video<double>(sym, lattice, cfg);
        for (int x = 0; x < w; ++x) {
            const auto fa = s.local_field({1, 2, x});
            const auto fb = s.local_field({1, 2, w - 1 - x});
            for (std::size_t i = 0; i < lattice.size(); ++i) {
                const auto [j, sign] = mirror[i];
                REQUIRE(std::abs(fb.c(0, j) - sign * fa.c(0, i)) <= 1e-8);
                REQUIRE(std::abs(fb.d(0, j) - fa.d(0, i)) <= 1e-8);
            }
        }
    }

    SUBCASE("determinism")
    {
        FitConfig cfg;
        cfg.window = {3, 5, 5};
        CHECK(fit_video(video, bank, cfg) == fit_video(video, bank, cfg));
    }
}

TEST_CASE("refine_bank")
{
    FitConfig fit;
    fit.window = {3, 5, 5};
    fit.threads = 1;
    const FrequencyBank bank({{0, 0, 0}, {0.6, 0.2, 0.1}, {0.2, -0.7, 0.3}}, 0);

    // pure sinusoids at a frequency the bank lacks
    std::vector<VideoBuffer> corpus;
    for (int k = 0; k < 4; ++k) {
        VideoBuffer v({3, 8, 8}, 1);
        for (int t = 0; t < 3; ++t)
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x) v.at(t, y, x, 0) = 0.5 + 0.3 * std::sin(1.3 * x + 0.4 * y - 0.5 * t + k);
        corpus.push_back(std::move(v));
    }

    SUBCASE("no improving proposal returns the initial bank")
    {
        RefineConfig cfg;
        cfg.iterations = 1;
        cfg.step = 50.0;
        CHECK(refine_bank(corpus, bank, fit, cfg) == bank);
    }

    SUBCASE("recoverable frequency")
    {
        RefineConfig cfg;
        cfg.iterations = 12;
        cfg.step = 0.1;
        const auto refined = refine_bank(corpus, bank, fit, cfg);
        const std::span<const VideoBuffer> holdout(corpus.data() + 3, 1);
        const double before = reconstruction_error(holdout, bank, fit);
        const double after = reconstruction_error(holdout, refined, fit);
        MESSAGE("holdout error " << before << " -> " << after);
        CHECK(after <= 0.8 * before);
        CHECK(refined.omega(0) == Vec3{0, 0, 0});
        CHECK(refined.dc_index() == 0);
    }

    SUBCASE("bad inputs")
    {
        RefineConfig cfg;
        cfg.iterations = 1;
        CHECK_THROWS_AS(refine_bank({}, bank, fit, cfg), ConfigError);
        cfg.iterations = -1;
        CHECK_THROWS_AS(refine_bank(corpus, bank, fit, cfg), ConfigError);
    }
}
