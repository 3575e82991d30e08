#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace denoise_bench {

/// Orthonormal 2D DCT-II on square n x n blocks (row-major).
class Dct2d {
public:
    explicit Dct2d(std::size_t n);

    std::size_t size() const { return n_; }
    void forward(std::span<double> block) const;
    void inverse(std::span<double> block) const;

private:
    // y = M x M^T when `transpose` is false, y = M^T x M otherwise.
    void apply(std::span<double> block, bool transpose) const;

    std::size_t n_;
    std::vector<double> basis_;  // basis_[k * n + i] = a_k cos(pi (2i + 1) k / 2n)
    mutable std::vector<double> scratch_;
};

/// Orthonormal multi-level Haar on `count` values spaced `stride` apart.
/// `count` must be a power of two. Coefficient 0 is the DC term sum / sqrt(count).
void haar_forward(std::span<double> data, std::size_t count, std::size_t stride);
void haar_inverse(std::span<double> data, std::size_t count, std::size_t stride);

bool is_power_of_two(std::size_t n);

/// Largest power of two <= n (n >= 1).
std::size_t floor_power_of_two(std::size_t n);

/// Separable Kaiser window, row-major n x n.
std::vector<double> kaiser_window_2d(std::size_t n, double beta);

}  // namespace denoise_bench
