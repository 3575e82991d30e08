#include "denoise_bench/harness.hpp"

#include "denoise_bench/dataset.hpp"
#include "denoise_bench/denoisers.hpp"
#include "denoise_bench/metrics.hpp"
#include "denoise_bench/noise.hpp"
#include "denoise_bench/parallel.hpp"
#include "denoise_bench/plugin.hpp"
#include "denoise_bench/rng.hpp"
#include "denoise_bench/tempdir.hpp"
#include "log.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <mutex>

namespace denoise_bench {

namespace fs = std::filesystem;

namespace {

using clock = std::chrono::steady_clock;

double seconds_since(clock::time_point start) {
    return std::chrono::duration<double>(clock::now() - start).count();
}

std::optional<double> dataset_sigma(const DatasetManifest &d) {
    if (d.noise && d.noise->variant != NoiseVariant::salt_pepper) return d.noise->sigma;
    return std::nullopt;
}

std::string image_file_name(const std::string &id) { return id + ".png"; }

class RunLog {
public:
    explicit RunLog(const fs::path &path) : out_(path, std::ios::trunc) {}

    void write(const std::string &line) {
        std::lock_guard lock(mutex_);
        out_ << line << '\n';
        out_.flush();
    }

private:
    std::ofstream out_;
    std::mutex mutex_;
};

}  // namespace

Image run_builtin(const DenoiserDescriptor &method, const Image &noisy, std::optional<double> noise_sigma,
                  std::size_t jobs) {
    auto param = [&](const std::string &key) -> std::optional<double> {
        auto it = method.parameters.find(key);
        return it == method.parameters.end() ? std::nullopt : std::optional(it->second);
    };
    switch (method.builtin_id) {
        case BuiltinId::identity: return identity_denoise(noisy);
        case BuiltinId::median: {
            const double radius = param("radius").value_or(1.0);
            if (!(radius >= 1.0) || radius != std::floor(radius)) {
                throw std::invalid_argument(fmt::format("method '{}': radius must be an integer >= 1", method.name));
            }
            return median_denoise(noisy, std::size_t(radius));
        }
        case BuiltinId::bm3d: {
            const auto sigma = param("sigma") ? param("sigma") : noise_sigma;
            if (!sigma) {
                throw std::invalid_argument(
                    fmt::format("method '{}': bm3d needs a 'sigma' parameter for datasets without Gaussian noise",
                                method.name));
            }
            return bm3d(noisy, *sigma, jobs);
        }
    }
    throw std::logic_error("unknown builtin");
}

std::uint64_t fingerprint_directory(const fs::path &dir) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    auto feed = [&h](const char *data, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(data[i]);
            h *= 0x100000001B3ull;
        }
    };
    for (const auto &file : list_images(dir)) {
        const std::string name = file.filename().string();
        feed(name.c_str(), name.size() + 1);
        std::ifstream in(file, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        feed(bytes.data(), bytes.size());
    }
    return h;
}

Image make_timing_image(std::uint64_t seed) {
    constexpr std::size_t side = 256;
    Image card(side, side);
    for (std::size_t r = 0; r < side; ++r) {
        for (std::size_t c = 0; c < side; ++c) {
            const double ramp = double(c) * 255.0 / double(side - 1);
            const bool square = (r / 32 + c / 32) % 2 == 0;
            card(r, c) = r < side / 2 ? ramp : (square ? 200.0 : 60.0);
        }
    }
    return awgn(card, 50.0, rng::derive_seed(seed, "timing"));
}

TimingResult time_denoiser(const DenoiserDescriptor &method, const Image &image, std::size_t repeats,
                           std::optional<double> noise_sigma) {
    if (repeats < 3) throw std::invalid_argument("time_denoiser: repeats must be >= 3");
    method.validate();

    std::function<double()> measure;
    std::optional<TempDir> stage;
    if (method.kind == DenoiserKind::builtin) {
        measure = [&] {
            const auto start = clock::now();
            const Image out = run_builtin(method, image, noise_sigma);
            return seconds_since(start);
        };
    } else {
        stage.emplace("denoise-bench-timing");
        const fs::path in = stage->path() / "input";
        fs::create_directories(in);
        save_image(quantize(image), in / "timing.png");
        DenoiserDescriptor single = method;
        single.batch = false;
        measure = [&, single, in, run = std::size_t{0}]() mutable {
            const fs::path out = stage->path() / fmt::format("output{}", run++);
            return run_external(single, in, out).seconds.front();
        };
    }

    measure();  // warm-up
    TimingResult result;
    for (std::size_t i = 0; i < repeats; ++i) result.samples_s.push_back(measure());
    std::vector<double> sorted = result.samples_s;
    std::ranges::sort(sorted);
    result.median_s = percentile_sorted(sorted, 0.5);
    return result;
}

BenchmarkResult run_benchmark(const RunManifest &manifest, const RunOptions &options) {
    manifest.validate();
    const std::size_t jobs = std::max<std::size_t>(options.jobs, 1);
    const fs::path root = manifest.output_dir;
    fs::create_directories(root);
    RunLog log(root / "run.log");
    BenchmarkResult result;

    auto fail = [&](const std::string &method, const std::string &dataset, const std::string &message) {
        detail::log().warn("{} on {} failed: {}", method, dataset, message);
        log.write(fmt::format("FAILED {} / {}: {}", method, dataset, message));
        result.failures.push_back({method, dataset, message});
    };

    // Plugins must pass the smoke test before they see real data.
    std::map<std::string, std::string> rejected;
    for (const auto &method : manifest.methods) {
        if (method.kind != DenoiserKind::external) continue;
        const PluginReport report = validate_plugin(method);
        if (!report.stderr_text.empty()) log.write(fmt::format("[{} validate] stderr:\n{}", method.name, report.stderr_text));
        if (!report.passed()) {
            rejected[method.name] = "plugin validation failed\n" + report.render();
            log.write(fmt::format("[{} validate]\n{}", method.name, report.render()));
        }
    }

    for (const auto &dataset : manifest.datasets) {
        detail::log().info("dataset {}", dataset.name);
        std::vector<Sample> samples;
        try {
            samples = corrupt_dataset(dataset, jobs);
        } catch (const std::exception &e) {
            for (const auto &method : manifest.methods) fail(method.name, dataset.name, e.what());
            continue;
        }

        const fs::path input_dir = root / "inputs" / dataset.name;
        fs::remove_all(input_dir);
        fs::create_directories(input_dir);
        parallel_for(samples.size(), jobs, [&](std::size_t i) {
            save_image(samples[i].noisy, input_dir / image_file_name(samples[i].image_id));
        });
        const std::uint64_t input_fingerprint = fingerprint_directory(input_dir);
        const auto sigma = dataset_sigma(dataset);

        for (const auto &method : manifest.methods) {
            if (auto it = rejected.find(method.name); it != rejected.end()) {
                fail(method.name, dataset.name, it->second);
                continue;
            }
            try {
                if (fingerprint_directory(input_dir) != input_fingerprint) {
                    throw std::runtime_error("fairness violation: noisy inputs changed between methods");
                }
                const fs::path method_dir = root / method.name / dataset.name;
                fs::remove_all(method_dir);
                fs::create_directories(method_dir);

                std::vector<double> seconds(samples.size(), 0.0);
                if (method.kind == DenoiserKind::builtin) {
                    parallel_for(samples.size(), jobs, [&](std::size_t i) {
                        const std::string name = image_file_name(samples[i].image_id);
                        const Image noisy = load_image(input_dir / name);
                        const auto start = clock::now();
                        const Image out = run_builtin(method, noisy, sigma);
                        seconds[i] = seconds_since(start);
                        save_image(out, method_dir / name);
                    });
                } else {
                    DenoiserDescriptor effective = method;
                    effective.batch = method.batch && manifest.timing == TimingMode::batch;
                    ExternalRun run;
                    try {
                        run = run_external(effective, input_dir, method_dir);
                    } catch (const PluginError &e) {
                        if (!e.stderr_text().empty()) {
                            log.write(fmt::format("[{} / {}] stderr:\n{}", method.name, dataset.name, e.stderr_text()));
                        }
                        throw;
                    }
                    if (!run.stderr_text.empty()) {
                        log.write(fmt::format("[{} / {}] stderr:\n{}", method.name, dataset.name, run.stderr_text));
                    }
                    for (std::size_t i = 0; i < samples.size(); ++i) seconds[i] = run.seconds.at(i);
                }

                std::vector<EvaluationRecord> records(samples.size());
                parallel_for(samples.size(), jobs, [&](std::size_t i) {
                    const std::string name = image_file_name(samples[i].image_id);
                    const Image out = load_image(method_dir / name);
                    if (!out.same_shape(samples[i].clean)) {
                        throw std::runtime_error("output dimension mismatch for " + samples[i].image_id);
                    }
                    EvaluationRecord &r = records[i];
                    r.method = method.name;
                    r.dataset = dataset.name;
                    r.image_id = samples[i].image_id;
                    r.psnr_db = manifest.score_psnr ? psnr(samples[i].clean, out) : std::nan("");
                    r.ssim = manifest.score_ssim ? ssim(samples[i].clean, out) : std::nan("");
                    r.wall_time_s = seconds[i];
                    r.output_path = (fs::path(method.name) / dataset.name / name).generic_string();
                });
                std::ranges::move(records, std::back_inserter(result.records));
                detail::log().info("  {}: {} images", method.name, samples.size());
            } catch (const std::exception &e) {
                fail(method.name, dataset.name, e.what());
            }
        }
    }

    if (manifest.timing_repeats > 0) {
        const Image card = make_timing_image(manifest.master_seed);
        std::optional<double> sigma;
        for (const auto &d : manifest.datasets) {
            if (!sigma) sigma = dataset_sigma(d);
        }
        for (const auto &method : manifest.methods) {
            if (rejected.contains(method.name)) continue;
            try {
                result.timings.push_back({method.name, time_denoiser(method, card, manifest.timing_repeats,
                                                                     sigma.value_or(50.0))});
            } catch (const std::exception &e) {
                fail(method.name, "timing", e.what());
            }
        }
    }
    return result;
}

std::string describe_plan(const RunManifest &manifest) {
    std::string out = fmt::format("output_dir: {}\nmaster_seed: {}\nmetrics:{}{}\n", manifest.output_dir.string(),
                                  manifest.master_seed, manifest.score_psnr ? " psnr" : "",
                                  manifest.score_ssim ? " ssim" : "");
    out += fmt::format("timing: {} (repeats {})\n", manifest.timing == TimingMode::batch ? "batch" : "per_image",
                       manifest.timing_repeats);
    out += "datasets:\n";
    for (const auto &d : manifest.datasets) {
        std::string count;
        try {
            const std::size_t n = list_images(d.clean_dir).size();
            count = fmt::format("{} images", d.test_count ? std::min(d.test_count, n) : n);
        } catch (const std::exception &e) {
            count = fmt::format("unreadable: {}", e.what());
        }
        if (d.kind == DatasetKind::synthetic) {
            out += fmt::format("  {}: synthetic {} seed={} from {} ({})\n", d.name, format_noise(*d.noise),
                               d.noise->master_seed, d.clean_dir.string(), count);
        } else {
            out += fmt::format("  {}: paired {} / {} ({})\n", d.name, d.clean_dir.string(), d.noisy_dir.string(), count);
        }
    }
    out += "methods:\n";
    for (const auto &m : manifest.methods) {
        if (m.kind == DenoiserKind::builtin) {
            out += fmt::format("  {}: builtin {}", m.name, to_string(m.builtin_id));
            for (const auto &[k, v] : m.parameters) out += fmt::format(" {}={}", k, v);
            out += '\n';
        } else {
            std::string cmd;
            for (const auto &a : m.command) cmd += (cmd.empty() ? "" : " ") + a;
            out += fmt::format("  {}: external '{}' timeout={}s {}\n", m.name, cmd, m.timeout_s,
                               m.batch ? "batch" : "per-image");
        }
    }
    return out;
}

}  // namespace denoise_bench
