#include "denoise_bench/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace denoise_bench {

namespace fs = std::filesystem;

Image::Image(std::size_t width, std::size_t height, double fill)
    : width_(width), height_(height), pixels_(width * height, fill) {
    if (width == 0 || height == 0) {
        throw ImageError(ImageErrorKind::zero_dimension, "zero-dimension image");
    }
}

Image::Image(std::size_t width, std::size_t height, std::vector<double> intensities)
    : width_(width), height_(height), pixels_(std::move(intensities)) {
    if (width == 0 || height == 0) {
        throw ImageError(ImageErrorKind::zero_dimension, "zero-dimension image");
    }
    if (pixels_.size() != width * height) {
        throw std::invalid_argument("intensity count does not match width x height");
    }
}

double round_half_away(double v) { return std::round(v); }

double luminance(double r, double g, double b) { return round_half_away(0.299 * r + 0.587 * g + 0.114 * b); }

Image quantize(const Image &img) {
    Image out = img;
    for (double &v : out.pixels()) {
        v = std::isnan(v) ? 0.0 : round_half_away(std::clamp(v, 0.0, 255.0));
    }
    return out;
}

bool is_quantized(const Image &img) {
    return std::ranges::all_of(img.pixels(), [](double v) { return v >= 0.0 && v <= 255.0 && v == std::floor(v); });
}

namespace {

bool has_png_signature(const std::string &head) {
    return head.size() >= 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(head.data()), 0, 8) == 0;
}

Image load_png(const fs::path &path) {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.c_str())) {
        throw ImageError(ImageErrorKind::corrupt_file, "corrupt PNG " + path.string() + ": " + png.message);
    }
    if (png.format & PNG_FORMAT_FLAG_LINEAR) {
        png_image_free(&png);
        throw ImageError(ImageErrorKind::unsupported_format, "16-bit PNG not supported: " + path.string());
    }
    if (png.width == 0 || png.height == 0) {
        png_image_free(&png);
        throw ImageError(ImageErrorKind::zero_dimension, "zero-dimension image: " + path.string());
    }

    const bool color = png.format & PNG_FORMAT_FLAG_COLOR;
    const bool alpha = png.format & PNG_FORMAT_FLAG_ALPHA;
    png.format = color ? (alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB) : (alpha ? PNG_FORMAT_GA : PNG_FORMAT_GRAY);
    const std::size_t channels = PNG_IMAGE_SAMPLE_CHANNELS(png.format);

    std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
        std::string msg = png.message;
        png_image_free(&png);
        throw ImageError(ImageErrorKind::corrupt_file, "corrupt PNG " + path.string() + ": " + msg);
    }

    const std::size_t n = std::size_t{png.width} * png.height;
    std::vector<double> pixels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t *px = buffer.data() + i * channels;
        pixels[i] = color ? luminance(px[0], px[1], px[2]) : double(px[0]);
    }
    return Image(png.width, png.height, std::move(pixels));
}

// Next whitespace-delimited header token, skipping '#' comments.
std::string pgm_token(std::istream &in) {
    std::string token;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!token.empty()) break;
            continue;
        }
        token.push_back(char(c));
    }
    return token;
}

Image load_pgm(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    auto corrupt = [&](const std::string &why) {
        return ImageError(ImageErrorKind::corrupt_file, "corrupt PGM " + path.string() + ": " + why);
    };
    if (pgm_token(in) != "P5") throw corrupt("expected P5 magic");
    std::size_t width = 0, height = 0, maxval = 0;
    try {
        width = std::stoul(pgm_token(in));
        height = std::stoul(pgm_token(in));
        maxval = std::stoul(pgm_token(in));
    } catch (const std::exception &) {
        throw corrupt("bad header");
    }
    if (width == 0 || height == 0) {
        throw ImageError(ImageErrorKind::zero_dimension, "zero-dimension image: " + path.string());
    }
    if (maxval == 0 || maxval > 255) {
        throw ImageError(ImageErrorKind::unsupported_format, "PGM maxval must be in [1, 255]: " + path.string());
    }
    std::vector<std::uint8_t> raw(width * height);
    in.read(reinterpret_cast<char *>(raw.data()), std::streamsize(raw.size()));
    if (std::size_t(in.gcount()) != raw.size()) throw corrupt("truncated raster");
    std::vector<double> pixels(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        pixels[i] = maxval == 255 ? raw[i] : round_half_away(raw[i] * 255.0 / double(maxval));
    }
    return Image(width, height, std::move(pixels));
}

std::vector<std::uint8_t> to_bytes(const Image &img) {
    std::vector<std::uint8_t> bytes(img.size());
    std::ranges::transform(img.pixels(), bytes.begin(), [](double v) { return std::uint8_t(v); });
    return bytes;
}

bool wants_pgm(const fs::path &path) {
    auto ext = path.extension().string();
    std::ranges::transform(ext, ext.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    return ext == ".pgm";
}

}  // namespace

Image load_image(const fs::path &path) {
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) {
        throw ImageError(ImageErrorKind::missing_file, "missing file: " + path.string());
    }
    std::string head(8, '\0');
    {
        std::ifstream in(path, std::ios::binary);
        in.read(head.data(), 8);
        head.resize(std::size_t(in.gcount()));
    }
    if (has_png_signature(head)) return load_png(path);
    if (head.size() >= 2 && head[0] == 'P' && head[1] == '5') return load_pgm(path);
    throw ImageError(ImageErrorKind::unsupported_format, "unsupported image format: " + path.string());
}

void save_image(const Image &img, const fs::path &path) {
    if (!is_quantized(img)) {
        throw ImageError(ImageErrorKind::unquantized, "unquantized intensities, refusing to write " + path.string());
    }
    const auto bytes = to_bytes(img);

    if (wants_pgm(path)) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw ImageError(ImageErrorKind::io, "cannot open for writing: " + path.string());
        out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
        out.write(reinterpret_cast<const char *>(bytes.data()), std::streamsize(bytes.size()));
        if (!out) throw ImageError(ImageErrorKind::io, "write failed: " + path.string());
        return;
    }

    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = png_uint_32(img.width());
    png.height = png_uint_32(img.height());
    png.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&png, path.c_str(), 0, bytes.data(), 0, nullptr)) {
        std::string msg = png.message;
        png_image_free(&png);
        throw ImageError(ImageErrorKind::io, "cannot write " + path.string() + ": " + msg);
    }
}

bool is_image_file(const fs::path &path) {
    auto ext = path.extension().string();
    std::ranges::transform(ext, ext.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    return ext == ".png" || ext == ".pgm";
}

}  // namespace denoise_bench
