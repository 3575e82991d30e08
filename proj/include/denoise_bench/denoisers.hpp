#pragma once

#include "denoise_bench/bm3d.hpp"
#include "denoise_bench/image.hpp"

#include <cstddef>

namespace denoise_bench {

/// "No denoising" baseline.
Image identity_denoise(const Image &img);

/// Median of the (2 radius + 1)^2 neighbourhood with mirror padding
/// (edge pixel not repeated), quantized.
Image median_denoise(const Image &img, std::size_t radius);

}  // namespace denoise_bench
