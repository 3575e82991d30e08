#pragma once

#include "denoise_bench/harness.hpp"
#include "denoise_bench/metrics.hpp"
#include "denoise_bench/record.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace denoise_bench {

inline constexpr std::string_view csv_header = "method,dataset,image_id,psnr_db,ssim,wall_time_s,output_path";

class CsvSchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Header plus one row per record sorted by (dataset, method, image_id);
/// numbers with 6 significant digits, infinite PSNR as `inf`.
std::string format_csv(std::span<const EvaluationRecord> records);
void emit_csv(std::span<const EvaluationRecord> records, const std::filesystem::path &path);

std::vector<EvaluationRecord> parse_csv(std::string_view text);
std::vector<EvaluationRecord> read_csv(const std::filesystem::path &path);

/// method,median_s,repeats
void emit_timing_csv(std::span<const MethodTiming> timings, const std::filesystem::path &path);

struct SummaryCell {
    std::string dataset;
    std::string method;
    double mean_psnr = 0.0;  // finite values only; +inf when none are finite
    double mean_ssim = 0.0;
    double mean_wall_time_s = 0.0;
    std::size_t count = 0;
    std::size_t infinite_psnr = 0;
    std::optional<AggregateStats> psnr_stats;
    bool best_psnr = false;
    bool best_ssim = false;
};

struct Summary {
    std::vector<std::string> datasets;  // sorted
    std::vector<std::string> methods;   // sorted
    std::vector<SummaryCell> cells;     // by (dataset, method); absent combinations skipped
    std::vector<MethodRanking> rankings;
    std::vector<std::vector<double>> tau;  // datasets x datasets

    const SummaryCell *cell(const std::string &dataset, const std::string &method) const;
};

/// Table of means with per-dataset best flags, mean-PSNR rankings, the
/// pairwise Kendall tau-b matrix and percentile statistics per cell. Tau for
/// two datasets uses the methods present in both.
Summary emit_summary(std::span<const EvaluationRecord> records);

struct SummarySections {
    bool rankings = true;
    bool tau = true;
};

std::string render_summary(const Summary &summary, SummarySections sections = {});

}  // namespace denoise_bench
