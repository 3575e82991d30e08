#include "denoise_bench/denoisers.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace denoise_bench {

Image identity_denoise(const Image &img) { return img; }

namespace {

// Reflect index into [0, n) without repeating the edge sample.
std::size_t mirror(std::ptrdiff_t i, std::size_t n) {
    if (n == 1) return 0;
    const auto period = std::ptrdiff_t(2 * (n - 1));
    i %= period;
    if (i < 0) i += period;
    return std::size_t(i < std::ptrdiff_t(n) ? i : period - i);
}

}  // namespace

Image median_denoise(const Image &img, std::size_t radius) {
    if (radius == 0) throw std::invalid_argument("median_denoise: radius must be >= 1");
    const std::size_t w = img.width();
    const std::size_t h = img.height();
    const auto r = std::ptrdiff_t(radius);
    Image out(w, h);
    std::vector<double> window;
    window.reserve((2 * radius + 1) * (2 * radius + 1));
    for (std::size_t row = 0; row < h; ++row) {
        for (std::size_t col = 0; col < w; ++col) {
            window.clear();
            for (std::ptrdiff_t dr = -r; dr <= r; ++dr) {
                const std::size_t rr = mirror(std::ptrdiff_t(row) + dr, h);
                for (std::ptrdiff_t dc = -r; dc <= r; ++dc) {
                    window.push_back(img(rr, mirror(std::ptrdiff_t(col) + dc, w)));
                }
            }
            auto mid = window.begin() + std::ptrdiff_t(window.size() / 2);
            std::nth_element(window.begin(), mid, window.end());
            out(row, col) = *mid;
        }
    }
    return quantize(out);
}

}  // namespace denoise_bench
