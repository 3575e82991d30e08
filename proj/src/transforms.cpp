#include "denoise_bench/transforms.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace denoise_bench {

Dct2d::Dct2d(std::size_t n) : n_(n), basis_(n * n), scratch_(n * n) {
    if (n == 0) throw std::invalid_argument("Dct2d: zero size");
    for (std::size_t k = 0; k < n; ++k) {
        const double scale = k == 0 ? std::sqrt(1.0 / double(n)) : std::sqrt(2.0 / double(n));
        for (std::size_t i = 0; i < n; ++i) {
            basis_[k * n + i] = scale * std::cos(std::numbers::pi * double(2 * i + 1) * double(k) / double(2 * n));
        }
    }
}

void Dct2d::apply(std::span<double> block, bool transpose) const {
    const std::size_t n = n_;
    auto m = [&](std::size_t r, std::size_t c) { return transpose ? basis_[c * n + r] : basis_[r * n + c]; };
    // rows: t = x M^T
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t k = 0; k < n; ++k) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += block[r * n + i] * m(k, i);
            scratch_[r * n + k] = acc;
        }
    }
    // columns: y = M t
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t k = 0; k < n; ++k) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += m(k, i) * scratch_[i * n + c];
            block[k * n + c] = acc;
        }
    }
}

void Dct2d::forward(std::span<double> block) const { apply(block, false); }
void Dct2d::inverse(std::span<double> block) const { apply(block, true); }

bool is_power_of_two(std::size_t n) { return std::has_single_bit(n); }

std::size_t floor_power_of_two(std::size_t n) { return std::bit_floor(n); }

void haar_forward(std::span<double> data, std::size_t count, std::size_t stride) {
    if (!is_power_of_two(count)) throw std::invalid_argument("haar: length must be a power of two");
    std::vector<double> tmp(count);
    for (std::size_t len = count; len > 1; len /= 2) {
        const std::size_t half = len / 2;
        for (std::size_t i = 0; i < half; ++i) {
            const double a = data[(2 * i) * stride];
            const double b = data[(2 * i + 1) * stride];
            tmp[i] = (a + b) * std::numbers::sqrt2 / 2.0;
            tmp[half + i] = (a - b) * std::numbers::sqrt2 / 2.0;
        }
        for (std::size_t i = 0; i < len; ++i) data[i * stride] = tmp[i];
    }
}

void haar_inverse(std::span<double> data, std::size_t count, std::size_t stride) {
    if (!is_power_of_two(count)) throw std::invalid_argument("haar: length must be a power of two");
    std::vector<double> tmp(count);
    for (std::size_t len = 2; len <= count; len *= 2) {
        const std::size_t half = len / 2;
        for (std::size_t i = 0; i < half; ++i) {
            const double s = data[i * stride];
            const double d = data[(half + i) * stride];
            tmp[2 * i] = (s + d) * std::numbers::sqrt2 / 2.0;
            tmp[2 * i + 1] = (s - d) * std::numbers::sqrt2 / 2.0;
        }
        for (std::size_t i = 0; i < len; ++i) data[i * stride] = tmp[i];
    }
}

std::vector<double> kaiser_window_2d(std::size_t n, double beta) {
    std::vector<double> w1(n, 1.0);
    if (n > 1) {
        const double norm = std::cyl_bessel_i(0.0, beta);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = 2.0 * double(i) / double(n - 1) - 1.0;
            w1[i] = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - t * t))) / norm;
        }
    }
    std::vector<double> w(n * n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) w[r * n + c] = w1[r] * w1[c];
    }
    return w;
}

}  // namespace denoise_bench
