#pragma once

#include "denoise_bench/descriptor.hpp"
#include "denoise_bench/image.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace denoise_bench {

// Protocol v1: `<cmd> --input DIR --output DIR`, 8-bit grayscale PNG in and
// out, same file names, exit code 0 on success, DENOISE_BENCH_PROTOCOL=1 in
// the child's environment. Standard error is captured.
inline constexpr std::string_view protocol_env_var = "DENOISE_BENCH_PROTOCOL";
inline constexpr std::string_view protocol_version = "1";

enum class PluginFailure {
    spawn_failure,
    nonzero_exit,
    timeout,
    name_contract,
    missing_output,
    undecodable_output,
    dimension_mismatch,
};

std::string_view to_string(PluginFailure f);

class PluginError : public std::runtime_error {
public:
    PluginError(PluginFailure failure, std::vector<std::string> image_ids, const std::string &detail,
                std::string stderr_text = {});

    PluginFailure failure() const { return failure_; }
    const std::vector<std::string> &image_ids() const { return image_ids_; }
    const std::string &stderr_text() const { return stderr_text_; }

private:
    PluginFailure failure_;
    std::vector<std::string> image_ids_;
    std::string stderr_text_;
};

struct Invocation {
    int exit_code = -1;
    bool timed_out = false;
    bool spawn_failed = false;
    double seconds = 0.0;
    std::string stderr_text;
};

/// Runs argv[0] (PATH lookup) in its own process group with the protocol
/// environment variable set. The group is killed after `timeout_s`.
Invocation invoke_process(const std::vector<std::string> &argv, double timeout_s);

struct OutputIssue {
    PluginFailure failure;
    std::vector<std::string> files;
};

/// Re-validates a plugin's output directory against its input directory:
/// unexpected names, missing files, undecodable files, dimension mismatches.
std::vector<OutputIssue> inspect_outputs(const std::filesystem::path &input_dir,
                                         const std::filesystem::path &output_dir);

struct ExternalRun {
    std::vector<std::string> file_names;  // sorted
    std::vector<double> seconds;          // per image, aligned with file_names
    std::string stderr_text;
};

/// Runs an external denoiser over every image in input_dir. In batch mode
/// one invocation covers all images and each gets total / N seconds; otherwise
/// one invocation per image. On failure output_dir is emptied and PluginError
/// names the offending files.
ExternalRun run_external(const DenoiserDescriptor &descriptor, const std::filesystem::path &input_dir,
                         const std::filesystem::path &output_dir);

struct PluginCheck {
    std::string name;
    enum class Status { passed, failed, skipped } status = Status::passed;
    std::optional<PluginFailure> failure;
    std::string detail;
};

struct PluginReport {
    std::vector<PluginCheck> checks;
    std::string stderr_text;

    bool passed() const;
    bool failed_with(PluginFailure f) const;
    std::string render() const;
};

/// Constant, gradient and seeded random 32x32 images, keyed by file name.
std::vector<std::pair<std::string, Image>> smoke_images();

/// Runs the plugin once over the smoke set and checks the output contract.
PluginReport validate_plugin(const DenoiserDescriptor &descriptor);

}  // namespace denoise_bench
