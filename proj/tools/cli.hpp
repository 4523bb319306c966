#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "vff/video.hpp"

namespace vff::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

inline constexpr const char* kEvalSchema = "vff-eval/1";
inline constexpr const char* kBenchSchema = "vff-bench/1";

/// `vff <synth|degrade|fit|sample|eval|bench> [flags]`. Normal output goes to
/// `out`, the single-line diagnostic of a failure to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses "TxHxW" (also accepts ',' as the separator).
Dims3 parse_dims(const std::string& text);

struct BenchConfig {
    Dims3 patch{14, 80, 80};
    double sscale = 4.0;
    double tscale = 8.0;
    int repeat = 3;
    std::size_t n_basis = 512;
    /// Output frames the naive sampler is timed on.
    int naive_frames = 2;
    unsigned threads = 0;
};

struct StageTimes {
    std::vector<double> seconds;
    double min() const;
    double median() const;
};

struct BenchReport {
    BenchConfig config;
    Dims3 output;
    StageTimes synth;
    StageTimes fit;
    StageTimes sample_batched;
    StageTimes sample_naive;
    std::size_t samples_batched = 0; // per run, all channels
    std::size_t samples_naive = 0;
    long peak_rss_kib = 0;
    /// Compares per-sample median times of the two sampler paths.
    double speedup() const;
    double samples_per_second() const;
    double max_abs_diff = 0.0; // batched vs naive on the timed frames
};

BenchReport run_bench(const BenchConfig& cfg, std::ostream* progress = nullptr);
std::string bench_json(const BenchReport& report);
void print_bench(const BenchReport& report, std::ostream& out);

} // namespace vff::cli
