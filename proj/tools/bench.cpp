#include <sys/resource.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "cli.hpp"
#include "vff/error.hpp"
#include "vff/fit.hpp"
#include "vff/pipeline.hpp"
#include "vff/sampler.hpp"
#include "vff/synth.hpp"

namespace vff::cli {

double StageTimes::min() const { return *std::min_element(seconds.begin(), seconds.end()); }

double StageTimes::median() const
{
    std::vector<double> s = seconds;
    std::sort(s.begin(), s.end());
    const std::size_t n = s.size();
    return n % 2 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

double BenchReport::speedup() const
{
    const double naive = sample_naive.median() / static_cast<double>(samples_naive);
    const double batched = sample_batched.median() / static_cast<double>(samples_batched);
    return naive / batched;
}

double BenchReport::samples_per_second() const
{
    return static_cast<double>(samples_batched) / sample_batched.median();
}

namespace {

template <typename F>
auto timed(StageTimes& into, F&& f)
{
    const auto start = std::chrono::steady_clock::now();
    auto result = f();
    into.seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    return result;
}

long peak_rss_kib()
{
    rusage usage{};
    getrusage(RUSAGE_SELF, &usage);
    return usage.ru_maxrss; // KiB on Linux
}

} // namespace

BenchReport run_bench(const BenchConfig& cfg, std::ostream* progress)
{
    if (cfg.repeat < 1) {
        throw ConfigError("--repeat must be at least 1");
    }
    if (cfg.naive_frames < 1) {
        throw ConfigError("--naive-frames must be at least 1");
    }
    BenchReport report;
    report.config = cfg;

    SynthSpec scene;
    scene.dims = cfg.patch;
    scene.freq_x = 0.7;
    scene.freq_y = 0.3;
    scene.velocity_x = 0.6;
    scene.velocity_y = -0.4;

    BankInitConfig bank_cfg;
    bank_cfg.n_basis = cfg.n_basis;
    const FrequencyBank bank = init_bank(bank_cfg);
    FitConfig fit_cfg;
    fit_cfg.threads = cfg.threads;
    const SampleSpec spec = SampleSpec::make(cfg.patch, cfg.sscale, cfg.tscale);
    const PsfSpec psf = auto_psf(cfg.sscale, cfg.tscale);
    const SampleOptions options{cfg.threads, {}};
    report.output = spec.output;
    const int naive_count = std::min(cfg.naive_frames, spec.output.t);

    for (int run = 0; run < cfg.repeat; ++run) {
        const VideoBuffer patch = timed(report.synth, [&] { return SynthScene(scene).render(); });
        const FieldGrid grid = timed(report.fit, [&] { return fit_video(patch, bank, fit_cfg); });
        const VideoBuffer batched = timed(report.sample_batched, [&] { return sample_grid(grid, spec, psf, options); });
        const VideoBuffer naive = timed(report.sample_naive, [&] {
            return sample_grid_naive_frames(grid, spec, psf, 0, naive_count, options);
        });
        report.samples_batched = batched.data().size();
        report.samples_naive = naive.data().size();
        double diff = 0.0;
        for (std::size_t k = 0; k < naive.data().size(); ++k) {
            diff = std::max(diff, std::abs(naive.data()[k] - batched.data()[k]));
        }
        report.max_abs_diff = std::max(report.max_abs_diff, diff);
        if (progress) {
            *progress << "run " << run + 1 << "/" << cfg.repeat << ": fit " << report.fit.seconds.back() << " s, sample "
                      << report.sample_batched.seconds.back() << " s\n";
        }
    }
    report.peak_rss_kib = peak_rss_kib();
    return report;
}

std::string bench_json(const BenchReport& r)
{
    const auto stage = [](const StageTimes& s) {
        return nlohmann::json{{"runs", s.seconds}, {"min_s", s.min()}, {"median_s", s.median()}};
    };
    const auto dims = [](Dims3 d) { return nlohmann::json::array({d.t, d.h, d.w}); };
    nlohmann::json j{
        {"schema", kBenchSchema},
        {"patch", dims(r.config.patch)},
        {"output", dims(r.output)},
        {"sscale", r.config.sscale},
        {"tscale", r.config.tscale},
        {"n_basis", r.config.n_basis},
        {"repeat", r.config.repeat},
        {"synth", stage(r.synth)},
        {"fit", stage(r.fit)},
        {"sample_batched", stage(r.sample_batched)},
        {"sample_naive", stage(r.sample_naive)},
        {"naive_frames", std::min(r.config.naive_frames, r.output.t)},
        {"samples_batched", r.samples_batched},
        {"samples_naive", r.samples_naive},
        {"samples_per_second", r.samples_per_second()},
        {"speedup", r.speedup()},
        {"max_abs_diff", r.max_abs_diff},
        {"peak_rss_kib", r.peak_rss_kib},
    };
    return j.dump();
}

void print_bench(const BenchReport& r, std::ostream& out)
{
    const auto line = [&](const char* name, const StageTimes& s) {
        out << "  " << name << ": min " << s.min() << " s, median " << s.median() << " s\n";
    };
    out << "patch " << r.config.patch.t << "x" << r.config.patch.h << "x" << r.config.patch.w << " -> " << r.output.t
        << "x" << r.output.h << "x" << r.output.w << ", N=" << r.config.n_basis << ", " << r.config.repeat
        << " run(s)\n";
    line("synth", r.synth);
    line("fit", r.fit);
    line("sample (batched)", r.sample_batched);
    line("sample (naive, frame subset)", r.sample_naive);
    out << "  batched throughput: " << r.samples_per_second() << " samples/s\n";
    out << "  batched vs naive: " << r.speedup() << "x per sample (max abs diff " << r.max_abs_diff << ")\n";
    out << "  peak RSS: " << r.peak_rss_kib / 1024.0 << " MiB\n";
}

} // namespace vff::cli
