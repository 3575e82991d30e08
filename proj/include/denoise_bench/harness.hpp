#pragma once

#include "denoise_bench/descriptor.hpp"
#include "denoise_bench/image.hpp"
#include "denoise_bench/manifest.hpp"
#include "denoise_bench/record.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace denoise_bench {

struct RunOptions {
    std::size_t jobs = 1;
};

struct MethodFailure {
    std::string method;
    std::string dataset;
    std::string message;
};

struct TimingResult {
    double median_s = 0.0;
    std::vector<double> samples_s;
};

struct MethodTiming {
    std::string method;
    TimingResult timing;
};

struct BenchmarkResult {
    std::vector<EvaluationRecord> records;
    std::vector<MethodFailure> failures;
    std::vector<MethodTiming> timings;
};

/// Applies a built-in method. bm3d uses its "sigma" parameter, else `noise_sigma`.
Image run_builtin(const DenoiserDescriptor &method, const Image &noisy, std::optional<double> noise_sigma,
                  std::size_t jobs = 1);

/// Corrupt, denoise, score. Noisy inputs are written once per dataset under
/// output_dir/inputs/<dataset>/ and every method reads those same files;
/// outputs land in output_dir/<method>/<dataset>/. A failing method is logged
/// in `failures` and the run continues.
BenchmarkResult run_benchmark(const RunManifest &manifest, const RunOptions &options = {});

/// One discarded warm-up, then the median of `repeats` (>= 3) wall-clock runs.
TimingResult time_denoiser(const DenoiserDescriptor &method, const Image &image, std::size_t repeats,
                           std::optional<double> noise_sigma = std::nullopt);

/// Deterministic 256x256 noisy test card used by the timing pass.
Image make_timing_image(std::uint64_t seed);

/// Order-sensitive hash of the image files' names and bytes in `dir`.
std::uint64_t fingerprint_directory(const std::filesystem::path &dir);

/// Human-readable plan for --dry-run.
std::string describe_plan(const RunManifest &manifest);

}  // namespace denoise_bench
