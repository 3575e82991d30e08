#include "denoise_bench/bm3d.hpp"

#include "denoise_bench/parallel.hpp"
#include "denoise_bench/transforms.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace denoise_bench {

void Bm3dParams::validate() const {
    if (patch_size == 0 || step == 0) throw std::invalid_argument("bm3d: patch_size and step must be >= 1");
    if (patch_size > search_window) throw std::invalid_argument("bm3d: patch_size exceeds search_window");
    if (max_matches == 0 || !is_power_of_two(max_matches)) {
        throw std::invalid_argument("bm3d: max_matches must be a power of two");
    }
    if (!(match_threshold_hard >= 0.0) || !(match_threshold_wiener >= 0.0) || !(hard_lambda >= 0.0)) {
        throw std::invalid_argument("bm3d: thresholds must be >= 0");
    }
    if (!(sigma > 0.0)) throw std::invalid_argument("bm3d: sigma must be > 0");
}

std::vector<std::size_t> reference_grid(std::size_t extent, std::size_t patch, std::size_t step) {
    std::vector<std::size_t> grid;
    const std::size_t last = extent - patch;
    for (std::size_t p = 0; p <= last; p += step) grid.push_back(p);
    if (grid.back() != last) grid.push_back(last);
    return grid;
}

namespace {

void extract(const Image &img, const std::vector<PatchPosition> &positions, std::size_t p, std::vector<double> &stack) {
    stack.resize(positions.size() * p * p);
    auto dst = stack.begin();
    for (const auto &pos : positions) {
        for (std::size_t r = 0; r < p; ++r) {
            const auto row = img.pixels().subspan((pos.row + r) * img.width() + pos.col, p);
            dst = std::copy(row.begin(), row.end(), dst);
        }
    }
}

void forward_3d(const Dct2d &dct, std::vector<double> &stack, std::size_t group) {
    const std::size_t area = dct.size() * dct.size();
    std::span<double> s(stack);
    for (std::size_t m = 0; m < group; ++m) dct.forward(s.subspan(m * area, area));
    for (std::size_t q = 0; q < area; ++q) haar_forward(s.subspan(q), group, area);
}

void inverse_3d(const Dct2d &dct, std::vector<double> &stack, std::size_t group) {
    const std::size_t area = dct.size() * dct.size();
    std::span<double> s(stack);
    for (std::size_t q = 0; q < area; ++q) haar_inverse(s.subspan(q), group, area);
    for (std::size_t m = 0; m < group; ++m) dct.inverse(s.subspan(m * area, area));
}

void check_dimensions(const Image &img, const Bm3dParams &params) {
    if (img.width() < params.patch_size || img.height() < params.patch_size) {
        throw std::invalid_argument(fmt::format("bm3d: image {}x{} smaller than patch size {}", img.width(),
                                                img.height(), params.patch_size));
    }
}

// Accumulates weighted patch estimates for a horizontal band of the image.
struct Band {
    std::size_t first_row = 0;
    std::size_t rows = 0;
    std::size_t width = 0;
    std::vector<double> numerator;
    std::vector<double> weights;

    Band(std::size_t first, std::size_t count, std::size_t w)
        : first_row(first), rows(count), width(w), numerator(count * w, 0.0), weights(count * w, 0.0) {}

    void add(const PatchPosition &pos, std::span<const double> patch, std::size_t p, std::span<const double> window,
             double weight) {
        for (std::size_t r = 0; r < p; ++r) {
            const std::size_t base = (pos.row + r - first_row) * width + pos.col;
            for (std::size_t c = 0; c < p; ++c) {
                const double w = weight * window[r * p + c];
                numerator[base + c] += w * patch[r * p + c];
                weights[base + c] += w;
            }
        }
    }
};

// Reference rows per band. Fixed so the floating-point reduction order does
// not depend on the worker count.
constexpr std::size_t band_reference_rows = 4;

template <typename PerReference>
StageResult run_stage(const Image &img, const Bm3dParams &params, std::size_t jobs, PerReference &&per_reference) {
    const std::size_t p = params.patch_size;
    const auto rows = reference_grid(img.height(), p, params.step);
    const auto cols = reference_grid(img.width(), p, params.step);
    const auto window = kaiser_window_2d(p, params.kaiser_beta);
    const std::size_t band_count = (rows.size() + band_reference_rows - 1) / band_reference_rows;

    std::vector<std::optional<Band>> bands(band_count);
    parallel_for(band_count, jobs, [&](std::size_t b) {
        const std::size_t first = b * band_reference_rows;
        const std::size_t last = std::min(rows.size(), first + band_reference_rows) - 1;
        // Matched patches reach half a search window beyond the band's reference rows.
        const std::size_t reach = params.search_window / 2;
        const std::size_t top = rows[first] - std::min(rows[first], reach);
        const std::size_t bottom = std::min(img.height(), rows[last] + reach + p);
        Band band(top, bottom - top, img.width());
        const Dct2d dct(p);
        std::vector<double> scratch;
        for (std::size_t i = first; i <= last; ++i) {
            for (std::size_t col : cols) per_reference(PatchPosition{rows[i], col}, dct, window, band, scratch);
        }
        bands[b] = std::move(band);
    });

    std::vector<double> numerator(img.size(), 0.0), weights(img.size(), 0.0);
    for (const auto &band : bands) {
        const std::size_t offset = band->first_row * img.width();
        for (std::size_t i = 0; i < band->numerator.size(); ++i) {
            numerator[offset + i] += band->numerator[i];
            weights[offset + i] += band->weights[i];
        }
    }

    Image estimate(img.width(), img.height());
    auto out = estimate.pixels();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = numerator[i] / weights[i];
    return StageResult{std::move(estimate), std::move(weights)};
}

}  // namespace

PatchGroup block_match(const Image &img, PatchPosition ref, const Bm3dParams &params, double threshold) {
    const std::size_t p = params.patch_size;
    if (img.width() < p || img.height() < p || ref.row > img.height() - p || ref.col > img.width() - p) {
        throw std::out_of_range(fmt::format("block_match: reference patch ({}, {}) out of bounds", ref.row, ref.col));
    }
    const std::size_t half = params.search_window / 2;
    const std::size_t step = params.step;
    const auto px = img.pixels();
    const std::size_t w = img.width();
    const double area = double(p * p);
    const double budget = threshold * area;

    // First/last grid offsets from the reference that stay inside the image and the window.
    auto span_of = [&](std::size_t origin, std::size_t extent) {
        const std::size_t back = std::min(origin, half) / step;
        const std::size_t fwd = std::min(extent - p - origin, half) / step;
        return std::pair{back, fwd};
    };
    const auto [up, down] = span_of(ref.row, img.height());
    const auto [left, right] = span_of(ref.col, img.width());

    struct Candidate {
        double distance;
        PatchPosition pos;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i <= up + down; ++i) {
        const std::size_t row = ref.row - up * step + i * step;
        for (std::size_t j = 0; j <= left + right; ++j) {
            const std::size_t col = ref.col - left * step + j * step;
            if (row == ref.row && col == ref.col) continue;
            double sum = 0.0;
            for (std::size_t r = 0; r < p && sum < budget; ++r) {
                const double *a = &px[(ref.row + r) * w + ref.col];
                const double *b = &px[(row + r) * w + col];
                for (std::size_t c = 0; c < p; ++c) {
                    const double d = a[c] - b[c];
                    sum += d * d;
                }
            }
            const double distance = sum / area;
            if (distance < threshold) candidates.push_back({distance, {row, col}});
        }
    }
    std::ranges::sort(candidates, [](const Candidate &a, const Candidate &b) {
        return a.distance != b.distance ? a.distance < b.distance : a.pos < b.pos;
    });

    const std::size_t size = floor_power_of_two(std::min(candidates.size() + 1, params.max_matches));
    PatchGroup group;
    group.reference_position = ref;
    group.patch_size = p;
    group.member_positions.push_back(ref);
    for (std::size_t i = 0; i + 1 < size; ++i) group.member_positions.push_back(candidates[i].pos);
    extract(img, group.member_positions, p, group.stack);
    return group;
}

StageResult bm3d_hard_stage_detailed(const Image &noisy, const Bm3dParams &params, std::size_t jobs) {
    params.validate();
    check_dimensions(noisy, params);
    const double threshold = params.hard_lambda * params.sigma;
    const double variance = params.sigma * params.sigma;
    const std::size_t area = params.patch_size * params.patch_size;

    return run_stage(noisy, params, jobs,
                     [&](PatchPosition ref, const Dct2d &dct, std::span<const double> window, Band &band,
                         std::vector<double> &) {
                         PatchGroup group = block_match(noisy, ref, params, params.match_threshold_hard);
                         const std::size_t g = group.group_size();
                         forward_3d(dct, group.stack, g);
                         std::size_t retained = 1;  // 3D DC is never thresholded
                         for (std::size_t i = 1; i < group.stack.size(); ++i) {
                             if (std::abs(group.stack[i]) > threshold) {
                                 ++retained;
                             } else {
                                 group.stack[i] = 0.0;
                             }
                         }
                         inverse_3d(dct, group.stack, g);
                         const double weight = 1.0 / (variance * double(retained));
                         for (std::size_t m = 0; m < g; ++m) {
                             band.add(group.member_positions[m], std::span(group.stack).subspan(m * area, area),
                                      params.patch_size, window, weight);
                         }
                     });
}

StageResult bm3d_wiener_stage_detailed(const Image &noisy, const Image &basic, const Bm3dParams &params,
                                       std::size_t jobs) {
    params.validate();
    if (!noisy.same_shape(basic)) throw std::invalid_argument("bm3d_wiener_stage: dimension mismatch");
    check_dimensions(noisy, params);
    const double variance = params.sigma * params.sigma;
    const std::size_t area = params.patch_size * params.patch_size;

    return run_stage(noisy, params, jobs,
                     [&](PatchPosition ref, const Dct2d &dct, std::span<const double> window, Band &band,
                         std::vector<double> &noisy_stack) {
                         PatchGroup group = block_match(basic, ref, params, params.match_threshold_wiener);
                         const std::size_t g = group.group_size();
                         extract(noisy, group.member_positions, params.patch_size, noisy_stack);
                         forward_3d(dct, group.stack, g);
                         forward_3d(dct, noisy_stack, g);
                         double norm2 = 0.0;
                         for (std::size_t i = 0; i < noisy_stack.size(); ++i) {
                             const double b2 = group.stack[i] * group.stack[i];
                             const double shrink = b2 / (b2 + variance);
                             noisy_stack[i] *= shrink;
                             norm2 += shrink * shrink;
                         }
                         inverse_3d(dct, noisy_stack, g);
                         // An all-zero basic spectrum gives an all-zero estimate; weight it like a single coefficient.
                         const double weight = 1.0 / (variance * (norm2 > 0.0 ? norm2 : 1.0));
                         for (std::size_t m = 0; m < g; ++m) {
                             band.add(group.member_positions[m], std::span(noisy_stack).subspan(m * area, area),
                                      params.patch_size, window, weight);
                         }
                     });
}

Image bm3d_hard_stage(const Image &noisy, const Bm3dParams &params, std::size_t jobs) {
    return quantize(bm3d_hard_stage_detailed(noisy, params, jobs).estimate);
}

Image bm3d_wiener_stage(const Image &noisy, const Image &basic, const Bm3dParams &params, std::size_t jobs) {
    return quantize(bm3d_wiener_stage_detailed(noisy, basic, params, jobs).estimate);
}

Image bm3d(const Image &noisy, double sigma, std::size_t jobs) {
    Bm3dParams params;
    params.sigma = sigma;
    const Image basic = bm3d_hard_stage(noisy, params, jobs);
    return bm3d_wiener_stage(noisy, basic, params, jobs);
}

}  // namespace denoise_bench
