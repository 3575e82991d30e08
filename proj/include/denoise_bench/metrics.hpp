#pragma once

#include "denoise_bench/image.hpp"
#include "denoise_bench/record.hpp"

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace denoise_bench {

class MetricError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// 10 log10(255^2 / MSE). Returns psnr_infinite when the images are identical.
double psnr(const Image &reference, const Image &test);

inline constexpr std::size_t ssim_window = 11;
inline constexpr double ssim_window_sigma = 1.5;
inline constexpr double ssim_c1 = (0.01 * 255) * (0.01 * 255);
inline constexpr double ssim_c2 = (0.03 * 255) * (0.03 * 255);

/// Mean SSIM over every full 11x11 Gaussian window (std 1.5), no padding.
double ssim(const Image &reference, const Image &test);

struct AggregateStats {
    double mean = 0.0;
    double median = 0.0;
    double p10 = 0.0;
    double p25 = 0.0;
    double p75 = 0.0;
    double p90 = 0.0;
    std::size_t count = 0;
};

/// Mean plus type-7 (linear interpolation) percentiles.
AggregateStats aggregate(std::span<const double> values);

/// Type-7 percentile of already sorted values, q in [0, 1].
double percentile_sorted(std::span<const double> sorted, double q);

struct MethodRanking {
    std::string noise_regime;
    std::vector<std::string> ordered_methods;  // best first
    std::vector<double> scores;                // mean PSNR, aligned with ordered_methods
};

/// Kendall tau-b between two rankings of the same method set, on their scores.
/// Fewer than two methods gives 1.0; a fully tied side gives NaN.
double kendall_tau(const MethodRanking &a, const MethodRanking &b);

/// Kendall tau-b of paired observations in O(n log n).
double kendall_tau_b(std::span<const double> x, std::span<const double> y);

/// Mean PSNR per method over `regime` (infinite values excluded), descending,
/// ties by method name. A method whose every PSNR is infinite scores +inf.
MethodRanking rank_methods(std::span<const EvaluationRecord> records, const std::string &regime);

}  // namespace denoise_bench
