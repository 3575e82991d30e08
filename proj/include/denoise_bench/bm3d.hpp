#pragma once

#include "denoise_bench/image.hpp"

#include <compare>
#include <cstddef>
#include <vector>

namespace denoise_bench {

/// Free parameters of the two-stage BM3D. Distances are mean squared
/// differences per pixel on the 0-255 scale.
struct Bm3dParams {
    std::size_t patch_size = 8;
    std::size_t step = 3;
    std::size_t search_window = 39;
    std::size_t max_matches = 16;
    double match_threshold_hard = 2500.0;
    double match_threshold_wiener = 400.0;
    double hard_lambda = 2.7;
    double kaiser_beta = 2.0;
    double sigma = 0.0;

    void validate() const;
};

struct PatchPosition {
    std::size_t row = 0;
    std::size_t col = 0;
    friend auto operator<=>(const PatchPosition &, const PatchPosition &) = default;
};

/// Stack of matched patches, layout [member][row][col]. The reference is member 0.
struct PatchGroup {
    PatchPosition reference_position;
    std::vector<PatchPosition> member_positions;
    std::vector<double> stack;
    std::size_t patch_size = 0;

    std::size_t group_size() const { return member_positions.size(); }
};

/// Patch origins along one axis: 0, step, 2 step, ... plus extent - patch when
/// the grid misses it, so every pixel is covered.
std::vector<std::size_t> reference_grid(std::size_t extent, std::size_t patch, std::size_t step);

/// Candidates lie at ref + k * step inside the search window. Those with
/// distance < threshold are sorted by (distance, row, col) after the reference,
/// and the group is cut to the largest power of two <= max_matches.
PatchGroup block_match(const Image &img, PatchPosition ref, const Bm3dParams &params, double threshold);

/// Stage estimate before quantization plus the per-pixel aggregation weight sum.
struct StageResult {
    Image estimate;
    std::vector<double> weight_sum;
};

StageResult bm3d_hard_stage_detailed(const Image &noisy, const Bm3dParams &params, std::size_t jobs = 1);
StageResult bm3d_wiener_stage_detailed(const Image &noisy, const Image &basic, const Bm3dParams &params,
                                       std::size_t jobs = 1);

/// Collaborative hard thresholding. Output quantized.
Image bm3d_hard_stage(const Image &noisy, const Bm3dParams &params, std::size_t jobs = 1);

/// Empirical Wiener shrinkage guided by `basic`. Output quantized.
Image bm3d_wiener_stage(const Image &noisy, const Image &basic, const Bm3dParams &params, std::size_t jobs = 1);

/// Both stages with default parameters. The result does not depend on `jobs`.
Image bm3d(const Image &noisy, double sigma, std::size_t jobs = 1);

}  // namespace denoise_bench
