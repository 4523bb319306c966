#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "vff/error.hpp"
#include "vff/fit.hpp"
#include "vff/io.hpp"
#include "vff/metrics.hpp"
#include "vff/pipeline.hpp"
#include "vff/sampler.hpp"
#include "vff/synth.hpp"

namespace vff::cli {

namespace fs = std::filesystem;

namespace {

std::string dims_str(Dims3 d)
{
    return std::to_string(d.t) + "x" + std::to_string(d.h) + "x" + std::to_string(d.w);
}

std::vector<double> parse_list(const std::string& text, const char* what)
{
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) {
            throw ConfigError(std::string("bad ") + what + " '" + text + "'");
        }
        values.push_back(v);
    }
    return values;
}

Vec3 parse_omega_max(const std::string& text)
{
    const auto v = parse_list(text, "--omega-max");
    if (v.size() == 1) {
        return {v[0], v[0], v[0]};
    }
    if (v.size() == 3) {
        return {v[0], v[1], v[2]};
    }
    throw ConfigError("--omega-max takes one value or wx,wy,wt");
}

PsfPolicy parse_psf(const std::string& text, double nu)
{
    if (text == "auto") {
        return PsfPolicy::automatic_with(nu);
    }
    if (text == "point") {
        return PsfPolicy::manual(PsfSpec::point());
    }
    const auto v = parse_list(text, "--psf");
    if (v.size() != 3) {
        throw ConfigError("--psf takes auto, point or sx,sy,st");
    }
    const PsfSpec spec{v[0], v[1], v[2]};
    spec.validate();
    return PsfPolicy::manual(spec);
}

/// JSON has no infinity; identical inputs report the string "inf".
nlohmann::json number(double v)
{
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    if (std::isnan(v)) {
        return nullptr;
    }
    return v;
}

std::string one_line(std::string msg)
{
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    while (!msg.empty() && msg.back() == ' ') {
        msg.pop_back();
    }
    return msg;
}

void add_common(CLI::App* cmd, unsigned& threads, std::string& config)
{
    cmd->add_option("--config", config, "key=value file; flags given on the command line win");
    cmd->add_option("--threads", threads, "Worker thread cap (0 = all cores)")->capture_default_str();
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

/// Turns a key=value file into extra flags for the options `cmd` has not
/// seen on the command line. Keys are long flag names without the dashes.
std::vector<std::string> config_flags(const CLI::App& cmd, const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read config file " + path);
    }
    std::vector<std::string> flags;
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        const CLI::Option* opt = key == "config" ? nullptr : cmd.get_option_no_throw("--" + key);
        if (opt == nullptr) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
        if (opt->count() > 0) {
            continue;
        }
        if (opt->get_expected_min() == 0) {
            if (value == "true" || value == "1" || value == "yes") {
                flags.push_back("--" + key);
            } else if (value != "false" && value != "0" && value != "no") {
                throw ConfigError(path + ":" + std::to_string(lineno) + ": '" + key + "' takes true or false");
            }
            continue;
        }
        flags.push_back("--" + key);
        flags.push_back(value);
    }
    return flags;
}

struct SynthArgs {
    std::string out;
    std::string pattern = "translating-sinusoid";
    std::string dims = "16x64x64";
    SynthSpec spec;
    int bit_depth = 8;
    unsigned threads = 0;
    std::string config;
};

struct DegradeArgs {
    std::string in, out;
    double sscale = 4;
    int tscale = 8;
    int bit_depth = 8;
    unsigned threads = 0;
    std::string config;
};

struct FitArgs {
    std::string in, out;
    std::size_t basis = 512;
    std::string omega_max = "12.566370614359172";
    std::string window = "5x9x9";
    double ridge = 1e-3;
    std::uint64_t seed = 0;
    std::string strategy = "random";
    std::string border = "reflect";
    std::string weight_sigma = "3";
    unsigned threads = 0;
    std::string config;
};

struct SampleArgs {
    std::string field, out;
    double sscale = 4;
    double tscale = 8;
    std::string psf = "auto";
    double nu = 0.5;
    int bit_depth = 8;
    unsigned threads = 0;
    std::string config;
};

struct EvalArgs {
    std::string pred, ref;
    std::string metrics = "psnr,ssim";
    bool luma = false;
    int split = 0;
    std::string json;
    unsigned threads = 0;
    std::string config;
};

struct BenchArgs {
    std::string patch = "14x80x80";
    BenchConfig cfg;
    std::string json;
    std::string config;
};

void cmd_synth(SynthArgs& a, std::ostream& out)
{
    a.spec.pattern = parse_pattern(a.pattern);
    a.spec.dims = parse_dims(a.dims);
    const SynthScene scene(a.spec);
    const VideoBuffer video = scene.render();
    write_video(video, a.out, a.bit_depth);
    const fs::path sidecar = fs::path(a.out).string() + ".scene.txt";
    std::ofstream side(sidecar);
    side << scene.describe() << '\n';
    if (!side) {
        throw IoError("cannot write " + sidecar.string());
    }
    out << "synth: " << to_string(a.spec.pattern) << " " << dims_str(video.dims()) << " -> " << a.out << " ("
        << sidecar.string() << ")\n";
}

void cmd_degrade(const DegradeArgs& a, std::ostream& out)
{
    const VideoBuffer in = read_video(a.in);
    const VideoBuffer lr = degrade(in, a.sscale, a.tscale, a.threads);
    write_video(lr, a.out, a.bit_depth);
    out << "degrade: input " << dims_str(in.dims()) << ", output " << dims_str(lr.dims()) << " (" << lr.frames()
        << " frames)\n";
}

void cmd_fit(const FitArgs& a, std::ostream& out)
{
    BankInitConfig bank_cfg;
    bank_cfg.n_basis = a.basis;
    bank_cfg.omega_max = parse_omega_max(a.omega_max);
    bank_cfg.seed = a.seed;
    if (a.strategy == "random") {
        bank_cfg.strategy = BankStrategy::stratified_random;
    } else if (a.strategy == "grid") {
        bank_cfg.strategy = BankStrategy::axis_grid;
    } else {
        throw ConfigError("--strategy must be random or grid");
    }
    FitConfig fit_cfg;
    fit_cfg.window = parse_dims(a.window);
    fit_cfg.ridge_lambda = a.ridge;
    fit_cfg.threads = a.threads;
    if (a.border == "reflect") {
        fit_cfg.border_mode = BorderMode::reflect;
    } else if (a.border == "clamp") {
        fit_cfg.border_mode = BorderMode::clamp;
    } else {
        throw ConfigError("--border must be reflect or clamp");
    }
    fit_cfg.sample_weight_sigma =
        a.weight_sigma == "uniform" ? kUniformWeights : parse_list(a.weight_sigma, "--weight-sigma").at(0);

    const VideoBuffer video = read_video(a.in);
    const auto start = std::chrono::steady_clock::now();
    const FieldGrid grid = fit_video(video, init_bank(bank_cfg), fit_cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    save_field(grid, a.out);
    out << "fit: " << dims_str(grid.dims()) << " voxels, C=" << grid.channels() << ", N=" << grid.n_basis() << " in "
        << std::setprecision(3) << secs << " s -> " << a.out << "\n";
}

void cmd_sample(const SampleArgs& a, std::ostream& out)
{
    const PsfSpec psf = parse_psf(a.psf, a.nu).resolve(a.sscale, a.tscale);
    const FieldGrid grid = load_field(a.field);
    const SampleSpec spec = SampleSpec::make(grid.dims(), a.sscale, a.tscale);
    const VideoBuffer video = sample_grid(grid, spec, psf, {a.threads, {}}).clamped();
    write_video(video, a.out, a.bit_depth);
    out << "sample: " << dims_str(grid.dims()) << " -> " << dims_str(video.dims()) << " psf (" << psf.sigma_x << ", "
        << psf.sigma_y << ", " << psf.sigma_t << ") -> " << a.out << "\n";
}

void cmd_eval(const EvalArgs& a, std::ostream& out)
{
    bool want_psnr = false;
    bool want_ssim = false;
    std::stringstream ss(a.metrics);
    std::string m;
    while (std::getline(ss, m, ',')) {
        if (m == "psnr") {
            want_psnr = true;
        } else if (m == "ssim") {
            want_ssim = true;
        } else {
            throw ConfigError("unknown metric '" + m + "'");
        }
    }
    if (!want_psnr && !want_ssim) {
        throw ConfigError("--metrics is empty");
    }
    if (a.split < 0) {
        throw ConfigError("--split-keyframes must be >= 0");
    }
    const VideoBuffer pred = read_video(a.pred);
    const VideoBuffer ref = read_video(a.ref);

    MetricReport report;
    report.kinds = classify_frames(ref.frames(), a.split);
    if (want_psnr) {
        report.psnr_db = psnr(pred, ref, a.luma);
        report.has_psnr = true;
    }
    if (want_ssim) {
        report.ssim = ssim(pred, ref);
        report.has_ssim = true;
    }

    std::vector<nlohmann::json> records;
    out << std::fixed << std::setprecision(4);
    for (int k = 0; k < ref.frames(); ++k) {
        const auto kind = report.kinds[static_cast<std::size_t>(k)];
        nlohmann::json rec{{"schema", kEvalSchema}, {"type", "frame"}, {"frame", k}, {"kind", to_string(kind)}};
        out << "frame " << std::setw(4) << k << "  " << std::setw(12) << std::left << to_string(kind) << std::right;
        if (report.has_psnr) {
            const double v = report.psnr_db.per_frame[static_cast<std::size_t>(k)];
            rec["psnr"] = number(v);
            out << "  psnr " << v << " dB";
        }
        if (report.has_ssim) {
            const double v = report.ssim.per_frame[static_cast<std::size_t>(k)];
            rec["ssim"] = number(v);
            out << "  ssim " << v;
        }
        out << '\n';
        records.push_back(std::move(rec));
    }

    nlohmann::json summary{{"schema", kEvalSchema},
                           {"type", "summary"},
                           {"frames", ref.frames()},
                           {"luma", a.luma},
                           {"split_keyframes", a.split}};
    const auto summarise = [&](const char* name, const FrameSeries& s) {
        summary[std::string(name) + "_mean"] = number(s.mean);
        out << name << " mean " << s.mean;
        if (a.split > 1) {
            const double key = MetricReport::mean_over(s.per_frame, report.kinds, FrameKind::keyframe);
            const double mid = MetricReport::mean_over(s.per_frame, report.kinds, FrameKind::interpolated);
            summary[std::string(name) + "_keyframe_mean"] = number(key);
            summary[std::string(name) + "_interpolated_mean"] = number(mid);
            out << " (keyframes " << key << ", interpolated " << mid << ")";
        }
        out << '\n';
    };
    if (report.has_psnr) {
        summarise("psnr", report.psnr_db);
    }
    if (report.has_ssim) {
        summarise("ssim", report.ssim);
    }
    records.push_back(std::move(summary));

    if (!a.json.empty()) {
        std::ofstream file;
        std::ostream* sink = &out;
        if (a.json != "-") {
            file.open(a.json);
            if (!file) {
                throw IoError("cannot create " + a.json);
            }
            sink = &file;
        }
        for (const auto& r : records) {
            *sink << r.dump() << '\n';
        }
    }
}

void cmd_bench(BenchArgs& a, std::ostream& out)
{
    a.cfg.patch = parse_dims(a.patch);
    const BenchReport report = run_bench(a.cfg, &out);
    print_bench(report, out);
    if (!a.json.empty()) {
        const std::string j = bench_json(report);
        if (a.json == "-") {
            out << j << '\n';
        } else {
            std::ofstream file(a.json);
            file << j << '\n';
            if (!file) {
                throw IoError("cannot write " + a.json);
            }
        }
    }
}

} // namespace

Dims3 parse_dims(const std::string& text)
{
    std::string s = text;
    std::replace(s.begin(), s.end(), ',', 'x');
    Dims3 d;
    char x1 = 0, x2 = 0;
    std::istringstream in(s);
    if (!(in >> d.t >> x1 >> d.h >> x2 >> d.w) || x1 != 'x' || x2 != 'x' || !in.eof()) {
        throw ConfigError("expected TxHxW, got '" + text + "'");
    }
    if (d.t < 1 || d.h < 1 || d.w < 1) {
        throw ConfigError("dimensions must be positive: '" + text + "'");
    }
    return d;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Video Fourier Field engine", "vff"};
    app.require_subcommand(1, 1);

    SynthArgs synth;
    auto* c_synth = app.add_subcommand("synth", "Render a closed-form synthetic video");
    c_synth->add_option("out", synth.out, "Output PNG directory or .y4m file")->required();
    c_synth->add_option("--pattern", synth.pattern,
                        "translating-sinusoid, translating-checkerboard, rotating-bars or accelerating-dot")
        ->capture_default_str();
    c_synth->add_option("--dims", synth.dims, "TxHxW")->capture_default_str();
    c_synth->add_option("--vx", synth.spec.velocity_x, "Velocity x, px/frame")->capture_default_str();
    c_synth->add_option("--vy", synth.spec.velocity_y, "Velocity y, px/frame")->capture_default_str();
    c_synth->add_option("--ax", synth.spec.accel_x, "Acceleration x, px/frame^2")->capture_default_str();
    c_synth->add_option("--ay", synth.spec.accel_y, "Acceleration y, px/frame^2")->capture_default_str();
    c_synth->add_option("--angular-rate", synth.spec.angular_rate, "rad/frame")->capture_default_str();
    c_synth->add_option("--fx", synth.spec.freq_x, "Spatial frequency x, rad/px")->capture_default_str();
    c_synth->add_option("--fy", synth.spec.freq_y, "Spatial frequency y, rad/px")->capture_default_str();
    c_synth->add_option("--amplitude", synth.spec.amplitude)->capture_default_str();
    c_synth->add_option("--radius", synth.spec.radius, "Dot radius, px")->capture_default_str();
    c_synth->add_option("--seed", synth.spec.seed)->capture_default_str();
    c_synth->add_option("--bit-depth", synth.bit_depth, "PNG bit depth (8 or 16)")->capture_default_str();
    add_common(c_synth, synth.threads, synth.config);

    DegradeArgs deg;
    auto* c_deg = app.add_subcommand("degrade", "Bicubic downsampling and temporal subsampling");
    c_deg->add_option("in", deg.in)->required();
    c_deg->add_option("out", deg.out)->required();
    c_deg->add_option("--sscale", deg.sscale, "Spatial factor s")->capture_default_str();
    c_deg->add_option("--tscale", deg.tscale, "Temporal factor r (integer)")->capture_default_str();
    c_deg->add_option("--bit-depth", deg.bit_depth)->capture_default_str();
    add_common(c_deg, deg.threads, deg.config);

    FitArgs fit;
    auto* c_fit = app.add_subcommand("fit", "Fit a field grid to a video");
    c_fit->add_option("in", fit.in)->required();
    c_fit->add_option("out", fit.out, "Field file (.vff)")->required();
    c_fit->add_option("--basis", fit.basis, "Number of basis frequencies N")->capture_default_str();
    c_fit->add_option("--omega-max", fit.omega_max, "Bank extent, w or wx,wy,wt (rad/sample)")->capture_default_str();
    c_fit->add_option("--window", fit.window, "Fit window TxHxW (odd)")->capture_default_str();
    c_fit->add_option("--ridge", fit.ridge, "Ridge lambda")->capture_default_str();
    c_fit->add_option("--seed", fit.seed, "Bank seed")->capture_default_str();
    c_fit->add_option("--strategy", fit.strategy, "Bank layout: random or grid")->capture_default_str();
    c_fit->add_option("--border", fit.border, "reflect or clamp")->capture_default_str();
    c_fit->add_option("--weight-sigma", fit.weight_sigma, "Sample weight width or 'uniform'")->capture_default_str();
    add_common(c_fit, fit.threads, fit.config);

    SampleArgs smp;
    auto* c_smp = app.add_subcommand("sample", "Sample a field file at new rates");
    c_smp->add_option("field", smp.field)->required();
    c_smp->add_option("out", smp.out)->required();
    c_smp->add_option("--sscale", smp.sscale, "Spatial factor s")->capture_default_str();
    c_smp->add_option("--tscale", smp.tscale, "Temporal factor r")->capture_default_str();
    c_smp->add_option("--psf", smp.psf, "auto, point or sx,sy,st")->capture_default_str();
    c_smp->add_option("--nu", smp.nu, "Auto PSF width per unit of s")->capture_default_str();
    c_smp->add_option("--bit-depth", smp.bit_depth)->capture_default_str();
    add_common(c_smp, smp.threads, smp.config);

    EvalArgs ev;
    auto* c_ev = app.add_subcommand("eval", "PSNR / SSIM report");
    c_ev->add_option("pred", ev.pred)->required();
    c_ev->add_option("ref", ev.ref)->required();
    c_ev->add_option("--metrics", ev.metrics, "Comma list of psnr, ssim")->capture_default_str();
    c_ev->add_flag("--luma", ev.luma, "PSNR on BT.601 luma instead of RGB");
    c_ev->add_option("--split-keyframes", ev.split, "Temporal factor r; frames 0, r, 2r, ... are keyframes");
    c_ev->add_option("--json", ev.json, "JSON-lines report file, '-' for stdout");
    add_common(c_ev, ev.threads, ev.config);

    BenchArgs bench;
    auto* c_bench = app.add_subcommand("bench", "Time fit and both samplers on a synthetic patch");
    c_bench->add_option("--patch", bench.patch, "TxHxW")->capture_default_str();
    c_bench->add_option("--sscale", bench.cfg.sscale)->capture_default_str();
    c_bench->add_option("--tscale", bench.cfg.tscale)->capture_default_str();
    c_bench->add_option("--repeat", bench.cfg.repeat)->capture_default_str();
    c_bench->add_option("--basis", bench.cfg.n_basis)->capture_default_str();
    c_bench->add_option("--naive-frames", bench.cfg.naive_frames, "Output frames timed on the naive path")
        ->capture_default_str();
    c_bench->add_option("--json", bench.json, "JSON report file, '-' for stdout");
    add_common(c_bench, bench.cfg.threads, bench.config);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        for (const CLI::App* sub : app.get_subcommands()) {
            const std::string config = sub->get_option("--config")->as<std::string>();
            if (config.empty()) {
                continue;
            }
            std::vector<std::string> merged = args;
            for (auto& f : config_flags(*sub, config)) {
                merged.push_back(std::move(f));
            }
            app.clear();
            reversed.assign(merged.rbegin(), merged.rend());
            app.parse(reversed);
        }
        if (c_synth->parsed()) {
            cmd_synth(synth, out);
        } else if (c_deg->parsed()) {
            cmd_degrade(deg, out);
        } else if (c_fit->parsed()) {
            cmd_fit(fit, out);
        } else if (c_smp->parsed()) {
            cmd_sample(smp, out);
        } else if (c_ev->parsed()) {
            cmd_eval(ev, out);
        } else if (c_bench->parsed()) {
            cmd_bench(bench, out);
        }
    } catch (const CLI::CallForHelp&) {
        const CLI::App* target = &app;
        for (const CLI::App* sub : app.get_subcommands()) {
            target = sub;
        }
        out << target->help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "vff: usage: " << one_line(e.what()) << " (see --help)\n";
        return kExitUsage;
    } catch (const vff::ConfigError& e) {
        err << "vff: usage: " << one_line(e.what()) << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "vff: error: " << one_line(e.what()) << "\n";
        return kExitDomain;
    }
    return kExitOk;
}

} // namespace vff::cli
