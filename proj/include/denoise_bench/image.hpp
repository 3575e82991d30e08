#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace denoise_bench {

/// Single-channel raster on the 8-bit luminance scale. Intensities are real
/// valued in [0, 255]; quantization to integers is always an explicit step.
class Image {
public:
    Image(std::size_t width, std::size_t height, double fill = 0.0);
    Image(std::size_t width, std::size_t height, std::vector<double> intensities);

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    std::size_t size() const { return pixels_.size(); }

    double operator()(std::size_t row, std::size_t col) const { return pixels_[row * width_ + col]; }
    double &operator()(std::size_t row, std::size_t col) { return pixels_[row * width_ + col]; }

    std::span<const double> pixels() const { return pixels_; }
    std::span<double> pixels() { return pixels_; }

    bool same_shape(const Image &other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    friend bool operator==(const Image &, const Image &) = default;

private:
    std::size_t width_;
    std::size_t height_;
    std::vector<double> pixels_;
};

enum class ImageErrorKind { missing_file, unsupported_format, corrupt_file, zero_dimension, unquantized, io };

class ImageError : public std::runtime_error {
public:
    ImageError(ImageErrorKind kind, const std::string &what) : std::runtime_error(what), kind_(kind) {}
    ImageErrorKind kind() const { return kind_; }

private:
    ImageErrorKind kind_;
};

/// Round half away from zero. Used for every integer conversion in the project.
double round_half_away(double v);

/// BT.601 luma, rounded half away from zero.
double luminance(double r, double g, double b);

/// Clip to [0, 255] and round. NaN maps to 0.
Image quantize(const Image &img);
bool is_quantized(const Image &img);

/// Reads PNG (any 8-bit color type) or binary PGM. Color is reduced to luma.
Image load_image(const std::filesystem::path &path);

/// Writes 8-bit grayscale. The format follows the extension: `.pgm` writes
/// binary PGM, anything else PNG. Throws on unquantized input.
void save_image(const Image &img, const std::filesystem::path &path);

bool is_image_file(const std::filesystem::path &path);

}  // namespace denoise_bench
