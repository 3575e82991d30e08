#pragma once

#include "denoise_bench/dataset.hpp"
#include "denoise_bench/descriptor.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace denoise_bench {

enum class TimingMode { batch, per_image };

/// Everything that determines a run's primary outputs.
struct RunManifest {
    std::vector<DatasetManifest> datasets;
    std::vector<DenoiserDescriptor> methods;
    bool score_psnr = true;
    bool score_ssim = true;
    std::uint64_t master_seed = 0;
    std::filesystem::path output_dir;
    /// per_image forces one plugin invocation per image for every external method.
    TimingMode timing = TimingMode::batch;
    /// Repeats of the separate timing pass; 0 skips it, otherwise >= 3.
    std::size_t timing_repeats = 0;

    void validate() const;
};

class ManifestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// JSON manifest. Relative paths are resolved against `base_dir`; a dataset
/// noise spec without "seed" inherits `master_seed`.
///
///   {
///     "master_seed": 2024, "output_dir": "out",
///     "metrics": ["psnr", "ssim"], "timing": "batch", "timing_repeats": 5,
///     "datasets": [
///       {"name": "gaussian", "kind": "synthetic", "clean_dir": "clean",
///        "noise": {"variant": "gaussian", "sigma": 50}},
///       {"name": "interception", "kind": "paired", "clean_dir": "ref", "noisy_dir": "intercepted"}
///     ],
///     "methods": [
///       {"name": "identity", "builtin": "identity"},
///       {"name": "median", "builtin": "median", "params": {"radius": 1}},
///       {"name": "bm3d", "builtin": "bm3d"},
///       {"name": "dncnn", "command": ["python3", "dncnn.py"], "timeout": 600, "batch": true}
///     ]
///   }
RunManifest parse_manifest(std::string_view json_text, const std::filesystem::path &base_dir);
RunManifest load_manifest(const std::filesystem::path &path);

/// Canonical JSON with every field explicit; parse_manifest inverts it.
std::string serialize_manifest(const RunManifest &manifest);

}  // namespace denoise_bench
