#include <doctest.h>

#include <cmath>
#include <numbers>
#include <thread>

#include "oracles.hpp"
#include "vff/error.hpp"
#include "vff/field_grid.hpp"
#include "vff/local_field.hpp"
#include "vff/psf.hpp"
#include "vff/sampler.hpp"

using namespace vff;
using vff::test::naive_eval;
using vff::test::random_bank;
using vff::test::random_field;
using vff::test::random_vec;

namespace {

constexpr double pi = std::numbers::pi;

double rel_err(double got, double want)
{
    return std::abs(got - want) / std::max(1.0, std::abs(want));
}

FieldGrid64 random_grid(SplitMix64& rng, Dims3 dims, const FrequencyBank& bank, int channels = 3)
{
    FieldGrid64 g(dims, channels, bank);
    for (double& v : g.coeffs()) {
        v = rng.uniform(-0.3, 0.3);
    }
    return g;
}

} // namespace

TEST_CASE("frequency bank rejects bad tables")
{
    CHECK_NOTHROW(FrequencyBank({{0, 0, 0}}, 0));
    CHECK_THROWS_AS(FrequencyBank({}, 0), ConfigError);
    CHECK_THROWS_AS(FrequencyBank({{1, 0, 0}}, 0), ConfigError);
    CHECK_THROWS_AS(FrequencyBank({{0, 0, 0}, {0, 0, 0}}, 0), ConfigError);
    CHECK_THROWS_AS(FrequencyBank({{0, 0, 0}, {NAN, 0, 0}}, 0), ConfigError);
    CHECK_THROWS_AS(FrequencyBank({{0, 0, 0}}, 3), ConfigError);
}

TEST_CASE("amplitude/phase conversion")
{
    auto ap = coeff_to_amp_phase(1, 0);
    CHECK(ap.amplitude == 1.0);
    CHECK(ap.phase == 0.0);

    ap = coeff_to_amp_phase(0, 0);
    CHECK(ap.amplitude == 0.0);
    CHECK(ap.phase == 0.0);

    ap = coeff_to_amp_phase(0, 1);
    CHECK(ap.amplitude == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(ap.phase == doctest::Approx(pi / 2).epsilon(1e-15));

    // a sin(theta + phi) == c sin(theta) + d cos(theta) on a dense theta grid
    for (int k = 0; k < 4096; ++k) {
        const double theta = -4 * pi + 8 * pi * k / 4096.0;
        CHECK(std::abs(ap.amplitude * std::sin(theta + ap.phase) - std::cos(theta)) < 1e-14);
    }

    // pi itself is mapped into the half-open range
    ap = coeff_to_amp_phase(-2, 0);
    CHECK(ap.phase == -pi);
    CHECK(ap.amplitude == 2.0);

    SplitMix64 rng(7);
    for (int k = 0; k < 10000; ++k) {
        const double c = rng.uniform(-5, 5);
        const double d = rng.uniform(-5, 5);
        const auto p = coeff_to_amp_phase(c, d);
        REQUIRE(p.amplitude >= 0.0);
        REQUIRE(p.phase >= -pi);
        REQUIRE(p.phase < pi);
        const auto back = amp_phase_to_coeff(p);
        const double scale = std::hypot(c, d);
        REQUIRE(std::abs(back.c - c) <= 1e-12 * scale);
        REQUIRE(std::abs(back.d - d) <= 1e-12 * scale);
        const double theta = rng.uniform(-10, 10);
        REQUIRE(std::abs(p.amplitude * std::sin(theta + p.phase) - (c * std::sin(theta) + d * std::cos(theta))) <
                1e-12 * (1 + scale));
    }
}

TEST_CASE("psf attenuation closed form")
{
    SplitMix64 rng(11);
    CHECK(psf_attenuation({0, 0, 0}, PsfSpec::isotropic(0.3)) == 1.0);
    CHECK(psf_attenuation({5, -3, 9}, PsfSpec::point()) == 1.0);
    const double sigma = 0.7;
    CHECK(psf_attenuation({2 * pi * std::sqrt(2.0) * sigma, 0, 0}, PsfSpec::isotropic(sigma)) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(std::exp(-1.0) == doctest::Approx(0.367879).epsilon(1e-6));

    CHECK_THROWS_AS(PsfSpec({0.0, 1.0, 1.0}).validate(), ConfigError);
    CHECK_THROWS_AS(PsfSpec({1.0, -1.0, 1.0}).validate(), ConfigError);
    CHECK_THROWS_AS(PsfSpec({1.0, 1.0, NAN}).validate(), ConfigError);

    for (int k = 0; k < 2000; ++k) {
        const Vec3 w = random_vec(rng, -3 * pi, 3 * pi);
        PsfSpec psf{rng.uniform(0.2, 4), rng.uniform(0.2, 4), rng.uniform(0.2, 4)};
        if (k % 3 == 0) psf.sigma_t = kPointSampling;
        if (k % 5 == 0) psf.sigma_x = kPointSampling;
        const double xi = psf_attenuation(w, psf);
        REQUIRE(xi > 0.0);
        REQUIRE(xi <= 1.0);
        REQUIRE(rel_err(xi, test::closed_form_xi(w, psf)) < 1e-14);
        const double prod = axis_attenuation(w.x, psf.sigma_x) * axis_attenuation(w.y, psf.sigma_y) *
                            axis_attenuation(w.t, psf.sigma_t);
        REQUIRE(std::abs(xi - prod) <= 1e-15 * std::max(xi, prod));
    }

    // equals one iff every non-sentinel axis carries zero frequency
    CHECK(psf_attenuation({0, 0, 3}, PsfSpec::spatial(0.5)) == 1.0);
    CHECK(psf_attenuation({0, 1e-3, 0}, PsfSpec::spatial(0.5)) < 1.0);
    CHECK(psf_attenuation({0, 0, 1e-3}, PsfSpec::isotropic(0.5)) < 1.0);

    // strictly more of the band passes as sigma grows
    for (double w : {0.1, 1.0, 3.0, 10.0}) {
        double prev = 0.0;
        for (double s = 0.25; s < 8; s *= 1.3) {
            const double xi = axis_attenuation(w, s);
            REQUIRE(xi > prev);
            prev = xi;
        }
    }
}

TEST_CASE("psf attenuation matches numerical gaussian convolution")
{
    SplitMix64 rng(2024);
    for (int k = 0; k < 20; ++k) {
        const Vec3 w = random_vec(rng, -2 * pi, 2 * pi);
        const double phi = rng.uniform(-pi, pi);
        const Vec3 u = random_vec(rng, -0.5, 0.5);
        const double sigma = rng.uniform(0.3, 3.0);
        const double closed = psf_attenuation(w, PsfSpec::isotropic(sigma)) * std::sin(dot(w, u) + phi);
        CHECK(std::abs(closed - test::convolved_sinusoid(w, phi, u, sigma)) <= 1e-5);
    }
}

TEST_CASE("eval_local")
{
    SplitMix64 rng(3);
    const auto bank = random_bank(rng, 40, 2 * pi);
    LocalField zero(3, 40);
    for (auto v : eval_local(zero, bank, {0.2, -0.1, 0.4}, PsfSpec::isotropic(0.6))) {
        CHECK(v == 0.0);
    }

    const FrequencyBank one({{0, 0, 0}, {pi, 0, 0}}, 0);
    LocalField f(1, 2);
    f.c(0, 1) = 1.0;
    CHECK(eval_local(f, one, {0.5, 0, 0})[0] == doctest::Approx(1.0).epsilon(1e-15));

    for (int k = 0; k < 200; ++k) {
        const auto field = random_field(rng, 3, 40);
        const Vec3 u = random_vec(rng, -2, 2);
        const PsfSpec psf = (k % 2) ? PsfSpec::point() : PsfSpec{rng.uniform(0.3, 3), rng.uniform(0.3, 3), kPointSampling};
        const auto got = eval_local(field, bank, u, psf);
        const auto want = naive_eval(field, bank, u, psf);
        for (int ch = 0; ch < 3; ++ch) {
            REQUIRE(rel_err(got[ch], want[ch]) < 1e-10);
        }
    }

    CHECK_THROWS_AS(eval_local(LocalField(3, 39), bank, {0, 0, 0}), StructuralError);
}

TEST_CASE("point psf evaluation is the plain sum bitwise")
{
    SplitMix64 rng(5);
    const auto bank = random_bank(rng, 64, 3 * pi);
    for (int k = 0; k < 50; ++k) {
        const auto field = random_field(rng, 3, 64);
        const Vec3 u = random_vec(rng, -0.5, 0.5);
        const auto got = eval_local(field, bank, u, PsfSpec::point());
        for (int ch = 0; ch < 3; ++ch) {
            double acc = 0.0;
            for (std::size_t i = 0; i < bank.size(); ++i) {
                const double th = dot(bank.omega(i), u);
                acc += 1.0 * (field.c(ch, i) * std::sin(th) + field.d(ch, i) * std::cos(th));
            }
            REQUIRE(got[ch] == acc);
        }
    }
}

TEST_CASE("evaluation is linear in coefficients")
{
    SplitMix64 rng(6);
    const auto bank = random_bank(rng, 30, 2 * pi);
    for (int k = 0; k < 100; ++k) {
        const auto f = random_field(rng, 3, 30);
        const auto g = random_field(rng, 3, 30);
        const double a = rng.uniform(-2, 2);
        const double b = rng.uniform(-2, 2);
        LocalField h(3, 30);
        for (std::size_t j = 0; j < h.data().size(); ++j) {
            h.data()[j] = a * f.data()[j] + b * g.data()[j];
        }
        const Vec3 u = random_vec(rng, -0.5, 0.5);
        const PsfSpec psf = PsfSpec::isotropic(rng.uniform(0.3, 2));
        const auto ef = eval_local(f, bank, u, psf);
        const auto eg = eval_local(g, bank, u, psf);
        const auto eh = eval_local(h, bank, u, psf);
        for (int ch = 0; ch < 3; ++ch) {
            REQUIRE(std::abs(eh[ch] - (a * ef[ch] + b * eg[ch])) < 1e-10);
        }
    }
}

TEST_CASE("locate")
{
    const Dims3 dims{2, 4, 4};
    auto loc = locate(dims, {0, 0, 0});
    CHECK(loc.voxel == VoxelIndex{0, 0, 0});
    CHECK(loc.offset == Vec3{0, 0, 0});

    loc = locate(dims, {2.5, 3.0, 1.0});
    CHECK(loc.voxel == VoxelIndex{1, 3, 3});
    CHECK(loc.offset == Vec3{-0.5, 0, 0});

    loc = locate(dims, {-0.5, 0, 0});
    CHECK(loc.voxel == VoxelIndex{0, 0, 0});
    CHECK(loc.offset == Vec3{-0.5, 0, 0});

    // upper boundary clamps into the last voxel with offset +0.5
    loc = locate(dims, {3.5, 3.5, 1.5});
    CHECK(loc.voxel == VoxelIndex{1, 3, 3});
    CHECK(loc.offset == Vec3{0.5, 0.5, 0.5});

    CHECK_THROWS_AS(locate(dims, {3.6, 0, 0}), DomainError);
    CHECK_THROWS_AS(locate(dims, {0, -0.51, 0}), DomainError);
    CHECK_THROWS_AS(locate(dims, {0, 0, NAN}), DomainError);

    SplitMix64 rng(9);
    for (int k = 0; k < 5000; ++k) {
        const Vec3 p{rng.uniform(-0.5, 3.5), rng.uniform(-0.5, 3.5), rng.uniform(-0.5, 1.5)};
        const auto l = locate(dims, p);
        REQUIRE(l.offset.x >= -0.5);
        REQUIRE(l.offset.x <= 0.5);
        REQUIRE(l.voxel.x + l.offset.x == p.x);
        REQUIRE(l.voxel.y + l.offset.y == p.y);
        REQUIRE(l.voxel.t + l.offset.t == p.t);
        if (l.offset.x == 0.5) REQUIRE(l.voxel.x == 3);
    }
}

TEST_CASE("eval_grid_point")
{
    SplitMix64 rng(12);
    const auto bank = random_bank(rng, 16, 2 * pi);
    const Dims3 dims{2, 3, 4};

    FieldGrid zero(dims, 3, bank);
    for (auto v : eval_grid_point(zero, {1.2, 0.7, 0.1}, PsfSpec::isotropic(0.4))) {
        CHECK(v == 0.0);
    }

    FieldGrid dc(dims, 3, bank);
    for (int t = 0; t < 2; ++t)
        for (int y = 0; y < 3; ++y)
            for (int x = 0; x < 4; ++x) {
                auto lf = dc.local_field({t, y, x});
                for (int ch = 0; ch < 3; ++ch) lf.d(ch, 0) = 0.3;
                dc.set_local_field({t, y, x}, lf);
            }
    for (int k = 0; k < 100; ++k) {
        const Vec3 p{rng.uniform(-0.5, 3.5), rng.uniform(-0.5, 2.5), rng.uniform(-0.5, 1.5)};
        const PsfSpec psf{rng.uniform(0.1, 3), rng.uniform(0.1, 3), rng.uniform(0.1, 3)};
        for (auto v : eval_grid_point(dc, p, psf)) {
            REQUIRE(v == doctest::Approx(0.3).epsilon(1e-7));
        }
    }

    const auto g = random_grid(rng, dims, bank);
    for (int t = 0; t < 2; ++t)
        for (int y = 0; y < 3; ++y)
            for (int x = 0; x < 4; ++x) {
                const auto a = eval_grid_point(g, {double(x), double(y), double(t)});
                const auto b = eval_local(g.local_field({t, y, x}), bank, {0, 0, 0});
                CHECK(a == b);
            }
    for (int k = 0; k < 100; ++k) {
        const Vec3 p{rng.uniform(-0.5, 3.5), rng.uniform(-0.5, 2.5), rng.uniform(-0.5, 1.5)};
        const auto loc = locate(dims, p);
        REQUIRE(eval_grid_point(g, p) == eval_local(g.local_field(loc.voxel), bank, loc.offset));
    }
    CHECK_THROWS_AS(eval_grid_point(g, {4.0, 0, 0}), DomainError);
}

TEST_CASE("cross-fade is continuous across voxel faces and off by default")
{
    SplitMix64 rng(13);
    const auto bank = random_bank(rng, 12, pi);
    const auto g = random_grid(rng, {1, 1, 3}, bank);
    const EvalOptions fade{0.2};
    const double eps = 1e-9;
    const auto left = eval_grid_point(g, {0.5 - eps, 0, 0}, PsfSpec::point(), fade);
    const auto right = eval_grid_point(g, {0.5 + eps, 0, 0}, PsfSpec::point(), fade);
    for (int ch = 0; ch < 3; ++ch) {
        CHECK(std::abs(left[ch] - right[ch]) < 1e-6);
    }
    // away from faces the blend has no effect
    CHECK(eval_grid_point(g, {1.1, 0, 0}, PsfSpec::point(), fade) == eval_grid_point(g, {1.1, 0, 0}));
    CHECK(eval_grid_point(g, {0.5, 0, 0}, PsfSpec::point(), EvalOptions{}) == eval_grid_point(g, {0.5, 0, 0}));
}

TEST_CASE("phase shift")
{
    SplitMix64 rng(17);
    const auto bank = random_bank(rng, 24, 2 * pi);
    const auto f = random_field(rng, 3, 24);
    CHECK(phase_shift(f, bank, {0, 0, 0}) == f);

    const FrequencyBank one({{0, 0, 0}, {pi, 0, 0}}, 0);
    LocalField s(1, 2);
    s.c(0, 1) = 1.0;
    const auto shifted = phase_shift(s, one, {1, 0, 0});
    const auto ap = coeff_to_amp_phase(shifted.c(0, 1), shifted.d(0, 1));
    CHECK(ap.amplitude == doctest::Approx(1.0));
    // -pi up to rounding; the canonical range folds +pi onto -pi
    CHECK(std::abs(std::remainder(ap.phase + pi, 2 * pi)) < 1e-12);
    CHECK(ap.phase < pi);

    for (int k = 0; k < 1000; ++k) {
        const auto field = random_field(rng, 3, 24);
        const Vec3 u = random_vec(rng, -0.5, 0.5);
        const Vec3 delta = random_vec(rng, -2, 2);
        const auto a = eval_local(phase_shift(field, bank, delta), bank, u);
        const auto b = naive_eval(field, bank, u - delta, PsfSpec::point());
        for (int ch = 0; ch < 3; ++ch) {
            REQUIRE(std::abs(a[ch] - b[ch]) < 1e-10);
        }
    }

    for (int k = 0; k < 200; ++k) {
        const auto field = random_field(rng, 3, 24);
        const Vec3 d1 = random_vec(rng, -2, 2);
        const Vec3 d2 = random_vec(rng, -2, 2);
        const auto two = phase_shift(phase_shift(field, bank, d1), bank, d2);
        const auto once = phase_shift(field, bank, d1 + d2);
        for (std::size_t j = 0; j < once.data().size(); ++j) {
            REQUIRE(std::abs(two.data()[j] - once.data()[j]) < 1e-12);
        }
    }
}

TEST_CASE("translate_grid")
{
    SplitMix64 rng(19);
    const auto bank = random_bank(rng, 20, 1.5 * pi);
    const Dims3 dims{4, 6, 6};

    const auto g = random_grid(rng, dims, bank);
    CHECK(translate_grid(g, {0, 0, 0}) == g);

    // uniform grid: every voxel holds the same global field
    const auto global = random_field(rng, 3, 20, 0.2);
    const auto uniform = tile_global_field<double>(global, bank, dims);
    const auto moved = translate_grid(uniform, {1, 0, 0});
    for (int k = 0; k < 200; ++k) {
        const Vec3 p{rng.uniform(0.5, 5.5), rng.uniform(-0.5, 5.5), rng.uniform(-0.5, 3.5)};
        const auto a = eval_grid_point(moved, p);
        const auto b = eval_grid_point(uniform, p - Vec3{1, 0, 0});
        for (int ch = 0; ch < 3; ++ch) REQUIRE(std::abs(a[ch] - b[ch]) < 1e-10);
    }

    VoxelIndex whole;
    Vec3 frac;
    split_translation({0.25, -0.5, 1.0}, whole, frac);
    CHECK(whole == VoxelIndex{1, 0, 0});
    CHECK(frac == Vec3{0.25, -0.5, 0.0});
    split_translation({0.5, 1.7, -2.5}, whole, frac);
    CHECK(whole == VoxelIndex{-2, 2, 1});
    CHECK(frac.x == -0.5);
    CHECK(frac.y == doctest::Approx(-0.3));
    CHECK(frac.t == -0.5);

    const Vec3 delta{0.25, -0.5, 1.0};
    const auto t = translate_grid(g, delta);
    int checked = 0;
    for (int k = 0; k < 2000; ++k) {
        const Vec3 p{rng.uniform(-0.5, 5.5), rng.uniform(-0.5, 5.5), rng.uniform(-0.5, 3.5)};
        const Vec3 q = p - delta;
        // the source point and its voxel must both be interior
        if (q.x < 0.5 || q.x > 4.5 || q.y < 0.5 || q.y > 4.5 || q.t < 0.5 || q.t > 2.5) continue;
        const auto a = eval_grid_point(t, p);
        const auto b = eval_grid_point(g, q);
        const auto lp = locate(dims, p);
        const auto lq = locate(dims, q);
        // same source voxel on both sides unless the point straddles a face
        if (lq.voxel != VoxelIndex{lp.voxel.t - 1, lp.voxel.y, lp.voxel.x}) continue;
        for (int ch = 0; ch < 3; ++ch) REQUIRE(std::abs(a[ch] - b[ch]) < 1e-10);
        ++checked;
    }
    CHECK(checked > 100);
}

TEST_CASE("sample_grid batched path")
{
    SplitMix64 rng(23);
    const auto bank = random_bank(rng, 24, 2 * pi);

    SUBCASE("identity spec hits voxel centers")
    {
        const auto g = random_grid(rng, {3, 5, 4}, bank);
        const auto spec = SampleSpec::make(g.dims(), 1, 1);
        const auto out = sample_grid(g, spec, PsfSpec::point());
        REQUIRE(out.dims() == g.dims());
        for (int t = 0; t < 3; ++t)
            for (int y = 0; y < 5; ++y)
                for (int x = 0; x < 4; ++x) {
                    const auto v = eval_grid_point(g, {double(x), double(y), double(t)});
                    for (int ch = 0; ch < 3; ++ch) REQUIRE(std::abs(out.at(t, y, x, ch) - v[ch]) < 1e-12);
                }
    }

    SUBCASE("zero grid")
    {
        FieldGrid g({2, 3, 3}, 3, bank);
        const auto out = sample_grid(g, SampleSpec::make(g.dims(), 2.5, 3), PsfSpec::isotropic(1));
        for (double v : out.data()) REQUIRE(v == 0.0);
    }

    SUBCASE("matches the per-point loop")
    {
        const auto g = random_grid(rng, {4, 8, 8}, bank);
        const auto spec = SampleSpec::make(g.dims(), 2, 2);
        for (const auto& psf : {PsfSpec::point(), PsfSpec::spatial(1.0), PsfSpec::isotropic(0.7)}) {
            const auto a = sample_grid(g, spec, psf);
            const auto b = sample_grid_naive(g, spec, psf);
            for (std::size_t j = 0; j < a.data().size(); ++j) REQUIRE(std::abs(a.data()[j] - b.data()[j]) <= 1e-8);
        }
    }

    SUBCASE("non-integer scales")
    {
        const auto g = random_grid(rng, {3, 5, 6}, bank).cast<float>();
        for (double s : {1.5, 2.5, 3.3}) {
            const auto spec = SampleSpec::make(g.dims(), s, s / 1.5);
            const auto a = sample_grid(g, spec, PsfSpec::spatial(0.5 * s));
            const auto b = sample_grid_naive(g, spec, PsfSpec::spatial(0.5 * s));
            for (std::size_t j = 0; j < a.data().size(); ++j) REQUIRE(std::abs(a.data()[j] - b.data()[j]) <= 1e-8);
        }
    }

    SUBCASE("thread count does not change the result")
    {
        const auto g = random_grid(rng, {3, 6, 6}, bank);
        const auto spec = SampleSpec::make(g.dims(), 3, 2);
        const auto a = sample_grid(g, spec, PsfSpec::spatial(1.5), {1, {}});
        const auto b = sample_grid(g, spec, PsfSpec::spatial(1.5), {4, {}});
        CHECK(a == b);
    }

    SUBCASE("spec must match the grid")
    {
        const auto g = random_grid(rng, {2, 4, 4}, bank);
        CHECK_THROWS_AS(sample_grid(g, SampleSpec::make({2, 4, 5}, 2, 1), PsfSpec::point()), DomainError);
    }
}

TEST_CASE("sample spec geometry")
{
    const auto spec = SampleSpec::make({14, 80, 80}, 4, 8);
    CHECK(spec.output == Dims3{112, 320, 320});
    CHECK(spec.x_coord(0) == doctest::Approx(-0.375));
    CHECK(spec.t_coord(8) == 1.0);
    CHECK(SampleSpec::make({3, 5, 5}, 1, 1).output == Dims3{3, 5, 5});
    CHECK(SampleSpec::make({3, 5, 5}, 1.5, 1).output == Dims3{3, 8, 8});
    CHECK_THROWS(SampleSpec::make({3, 5, 5}, 0, 1));
}

TEST_CASE("concurrent evaluation from many threads")
{
    SplitMix64 rng(29);
    const auto bank = random_bank(rng, 16, pi);
    const auto g = random_grid(rng, {2, 6, 6}, bank);
    const auto spec = SampleSpec::make(g.dims(), 2, 2);
    const auto want = sample_grid(g, spec, PsfSpec::spatial(1), {1, {}});
    std::vector<VideoBuffer> got(4);
    {
        std::vector<std::jthread> pool;
        for (int k = 0; k < 4; ++k) {
            pool.emplace_back([&, k] { got[k] = sample_grid(g, spec, PsfSpec::spatial(1), {2, {}}); });
        }
    }
    for (const auto& v : got) CHECK(v == want);
}
