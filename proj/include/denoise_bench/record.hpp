#pragma once

#include <filesystem>
#include <limits>
#include <string>

namespace denoise_bench {

inline constexpr double psnr_infinite = std::numeric_limits<double>::infinity();

/// One (method, dataset, image) result. `output_path` is relative to the run's output directory.
struct EvaluationRecord {
    std::string method;
    std::string dataset;
    std::string image_id;
    double psnr_db = 0.0;
    double ssim = 0.0;
    double wall_time_s = 0.0;
    std::string output_path;
};

}  // namespace denoise_bench
