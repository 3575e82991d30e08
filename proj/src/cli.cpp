#include "denoise_bench/cli.hpp"

#include "denoise_bench/dataset.hpp"
#include "denoise_bench/harness.hpp"
#include "denoise_bench/manifest.hpp"
#include "denoise_bench/noise.hpp"
#include "denoise_bench/parallel.hpp"
#include "denoise_bench/plugin.hpp"
#include "denoise_bench/report.hpp"
#include "log.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdlib>
#include <fstream>
#include <ostream>

namespace denoise_bench {

namespace fs = std::filesystem;

void configure_logging() {
    const char *level = std::getenv("DENOISE_BENCH_LOG");
    detail::log().set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
}

namespace {

struct CorruptArgs {
    std::string in, out, noise;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
};

struct ValidateArgs {
    std::vector<std::string> command;
    double timeout = 60.0;
};

struct RunArgs {
    std::string manifest;
    std::size_t jobs = 1;
    bool dry_run = false;
};

struct ReportArgs {
    std::string csv;
    bool rank = false;
    bool tau = false;
};

int cmd_corrupt(const CorruptArgs &args, std::ostream &out, std::ostream &err) {
    NoiseSpec spec;
    try {
        spec = parse_noise(args.noise);
    } catch (const NoiseSyntaxError &e) {
        err << "invalid --noise '" << args.noise << "': " << e.what() << "\n";
        return exit_usage;
    }
    spec.master_seed = args.seed;

    DatasetManifest dataset;
    dataset.name = "corrupt";
    dataset.kind = DatasetKind::synthetic;
    dataset.clean_dir = args.in;
    dataset.noise = spec;

    const auto samples = corrupt_dataset(dataset, args.jobs);
    fs::create_directories(args.out);
    parallel_for(samples.size(), args.jobs, [&](std::size_t i) {
        save_image(samples[i].noisy, fs::path(args.out) / (samples[i].image_id + ".png"));
    });
    out << fmt::format("wrote {} images ({}, seed {}) to {}\n", samples.size(), format_noise(spec), spec.master_seed,
                       args.out);
    return exit_success;
}

int cmd_validate(const ValidateArgs &args, std::ostream &out) {
    DenoiserDescriptor plugin;
    plugin.name = "plugin";
    plugin.kind = DenoiserKind::external;
    plugin.command = args.command;
    plugin.timeout_s = args.timeout;
    const PluginReport report = validate_plugin(plugin);
    out << report.render();
    if (!report.stderr_text.empty()) out << "--- plugin stderr ---\n" << report.stderr_text;
    return report.passed() ? exit_success : exit_failure;
}

int cmd_run(const RunArgs &args, std::ostream &out, std::ostream &err) {
    const RunManifest manifest = load_manifest(args.manifest);
    if (args.dry_run) {
        out << describe_plan(manifest);
        return exit_success;
    }
    const BenchmarkResult result = run_benchmark(manifest, RunOptions{args.jobs});

    const fs::path csv = manifest.output_dir / "results.csv";
    emit_csv(result.records, csv);
    {
        std::ofstream m(manifest.output_dir / "manifest.json");
        m << serialize_manifest(manifest);
    }
    // The summary is built from the CSV as written so `report` reproduces it exactly.
    const std::string summary = render_summary(emit_summary(read_csv(csv)));
    {
        std::ofstream s(manifest.output_dir / "summary.txt");
        s << summary;
    }
    out << summary;
    if (!result.timings.empty()) {
        emit_timing_csv(result.timings, manifest.output_dir / "timing.csv");
        out << "== Median wall time on 256x256 (s) ==\n";
        for (const auto &t : result.timings) out << fmt::format("{:<20}{:.6g}\n", t.method, t.timing.median_s);
        out << '\n';
    }
    for (const auto &f : result.failures) {
        err << fmt::format("FAILED {} on {}: {}\n", f.method, f.dataset, f.message);
    }
    out << fmt::format("{} records, {} failures; results in {}\n", result.records.size(), result.failures.size(),
                       csv.string());
    return result.failures.empty() ? exit_success : exit_failure;
}

int cmd_report(const ReportArgs &args, std::ostream &out) {
    const auto records = read_csv(args.csv);
    const bool all = !args.rank && !args.tau;
    out << render_summary(emit_summary(records), SummarySections{all || args.rank, all || args.tau});
    return exit_success;
}

}  // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    configure_logging();
    CLI::App app{"Reproducible benchmark harness for image denoisers", "denoise-bench"};
    app.require_subcommand(1);

    CorruptArgs corrupt;
    auto *c = app.add_subcommand("corrupt", "Materialize a noisy copy of an image directory");
    c->add_option("--in", corrupt.in, "Clean image directory")->required();
    c->add_option("--out", corrupt.out, "Output directory")->required();
    c->add_option("--noise", corrupt.noise, "gaussian:sigma=S | sp:fraction=F | mixture:sigma=S,fraction=F")->required();
    c->add_option("--seed", corrupt.seed, "Master seed")->required();
    c->add_option("--jobs", corrupt.jobs, "Worker threads")->check(CLI::PositiveNumber);

    ValidateArgs validate;
    auto *v = app.add_subcommand("validate", "Check an external denoiser against the plugin protocol");
    v->add_option("--timeout", validate.timeout, "Seconds before the plugin is killed")->check(CLI::PositiveNumber);
    v->add_option("command", validate.command, "Plugin command and fixed arguments (after --)")->required();

    RunArgs run;
    auto *r = app.add_subcommand("run", "Execute a benchmark manifest");
    r->add_option("--manifest", run.manifest, "Run manifest (JSON)")->required();
    r->add_option("--jobs", run.jobs, "Worker threads for corruption and scoring")->check(CLI::PositiveNumber);
    r->add_flag("--dry-run", run.dry_run, "Print the resolved plan without executing");

    ReportArgs report;
    auto *p = app.add_subcommand("report", "Summarize a results CSV");
    p->add_option("--csv", report.csv, "results.csv from a run")->required();
    p->add_flag("--rank", report.rank, "Print per-dataset rankings");
    p->add_flag("--tau", report.tau, "Print the Kendall tau matrix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        out << app.help();
        return exit_success;
    } catch (const CLI::ParseError &e) {
        err << e.what() << "\n" << "Run with --help for usage.\n";
        return exit_usage;
    }

    try {
        if (c->parsed()) return cmd_corrupt(corrupt, out, err);
        if (v->parsed()) return cmd_validate(validate, out);
        if (r->parsed()) return cmd_run(run, out, err);
        if (p->parsed()) return cmd_report(report, out);
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return exit_failure;
    }
    return exit_usage;
}

}  // namespace denoise_bench
