#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "denoise_bench/dataset.hpp"
#include "denoise_bench/metrics.hpp"
#include "denoise_bench/noise.hpp"
#include "denoise_bench/rng.hpp"
#include "denoise_bench/tempdir.hpp"
#include "test_support.hpp"

#include <cmath>
#include <numbers>

using namespace denoise_bench;
namespace fs = std::filesystem;

namespace {

std::size_t count_changed(const Image &a, const Image &b) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) n += a.pixels()[i] != b.pixels()[i];
    return n;
}

double mean(const Image &img) {
    double s = 0;
    for (double v : img.pixels()) s += v;
    return s / double(img.size());
}

double stddev(const Image &img) {
    const double m = mean(img);
    double s = 0;
    for (double v : img.pixels()) s += (v - m) * (v - m);
    return std::sqrt(s / double(img.size() - 1));
}

}  // namespace

TEST_CASE("mix64 matches SplitMix64 reference outputs") {
    // SplitMix64 with state 0: first outputs of the reference generator.
    CHECK(rng::bits(0, 0) == 0xE220A8397B1DCDAFull);
    CHECK(rng::bits(0, 1) == 0x6E789E6AA1B965F4ull);
    CHECK(rng::fnv1a64("") == 0xCBF29CE484222325ull);
    CHECK(rng::fnv1a64("a") == 0xAF63DC4C8601EC8Cull);
}

TEST_CASE("standard normal stream moments") {
    constexpr std::size_t n = 1'000'000;
    double s = 0, s2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = rng::standard_normal(99, i);
        s += z;
        s2 += z * z;
    }
    const double m = s / n;
    const double var = s2 / n - m * m;
    CHECK(std::abs(m) < 3.0 / std::sqrt(double(n)));
    // std error of the sample variance of N(0,1) is sqrt(2/n)
    CHECK(std::abs(var - 1.0) < 3.0 * std::sqrt(2.0 / n));
}

TEST_CASE("awgn") {
    const Image img = test_support::random_image(50, 40, 3, false);

    SUBCASE("sigma 0 is quantize") { CHECK(awgn(img, 0.0, 1234) == quantize(img)); }
    SUBCASE("deterministic per seed") {
        CHECK(awgn(img, 25.0, 42) == awgn(img, 25.0, 42));
        CHECK(awgn(img, 25.0, 42) != awgn(img, 25.0, 43));
    }
    SUBCASE("negative sigma") { CHECK_THROWS_AS(awgn(img, -1.0, 0), std::invalid_argument); }
    SUBCASE("output quantized") { CHECK(is_quantized(awgn(img, 50.0, 5))); }
}

TEST_CASE("awgn clipping on a white field follows the half-normal expectation") {
    const Image white(1000, 1000, 255.0);
    const double expected = 255.0 - 50.0 / std::sqrt(2.0 * std::numbers::pi);  // 235.05
    const double m = mean(awgn(white, 50.0, 2024));
    CHECK(std::abs(m - 235.1) <= 0.2);
    CHECK(std::abs(m - expected) < 0.2);
}

TEST_CASE("awgn standard deviation on a mid-grey field") {
    const double sd = stddev(awgn(Image(1000, 1000, 128.0), 50.0, 77));
    CHECK(sd >= 49.4);
    CHECK(sd <= 50.4);
}

TEST_CASE("salt_pepper exact counts") {
    const Image img(100, 100, 128.0);
    const Image noisy = salt_pepper(img, 0.2, 9);
    CHECK(count_changed(img, noisy) == 2000);
    std::size_t zeros = 0, whites = 0;
    for (double v : noisy.pixels()) {
        zeros += v == 0.0;
        whites += v == 255.0;
    }
    CHECK(zeros == 1000);
    CHECK(whites == 1000);

    CHECK(salt_pepper(img, 0.0, 9) == img);
    for (double v : salt_pepper(img, 1.0, 9).pixels()) CHECK((v == 0.0 || v == 255.0));
    CHECK_THROWS_AS(salt_pepper(img, 1.5, 0), std::invalid_argument);
    CHECK_THROWS_AS(salt_pepper(img, -0.1, 0), std::invalid_argument);
}

TEST_CASE("salt_pepper odd count gives the extra pixel to pepper") {
    const Image img(3, 3, 128.0);  // round(0.5 * 9) = round(4.5) = 5 -> 3 zeros, 2 whites
    const Image noisy = salt_pepper(img, 0.5, 1);
    std::size_t zeros = 0, whites = 0;
    for (double v : noisy.pixels()) {
        zeros += v == 0.0;
        whites += v == 255.0;
    }
    CHECK(zeros == 3);
    CHECK(whites == 2);
}

TEST_CASE("salt_pepper count is round(fraction * N) on random shapes and fractions") {
    std::mt19937 gen(5);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t w = 1 + gen() % 40, h = 1 + gen() % 40;
        const double fraction = std::uniform_real_distribution<double>(0, 1)(gen);
        const Image img(w, h, 128.0);
        const Image noisy = salt_pepper(img, fraction, gen());
        CHECK(count_changed(img, noisy) == std::size_t(std::round(fraction * double(w * h))));
    }
}

TEST_CASE("mixture is awgn then salt-and-pepper with derived sub-seeds") {
    const Image img = test_support::random_image(64, 48, 8);
    const std::uint64_t seed = 0xABCDEF;
    const Image manual = salt_pepper(awgn(img, 50.0, rng::derive_seed(seed, "awgn")), 0.2, rng::derive_seed(seed, "sp"));
    CHECK(mixture(img, 50.0, 0.2, seed) == manual);
    CHECK(mixture(img, 0.0, 0.0, seed) == quantize(img));
}

TEST_CASE("mixture PSNR on a natural image") {
    const auto images = test_support::natural_images(1);
    const double p = psnr(images[0], mixture(images[0], 50.0, 0.2, 31));
    CHECK(p >= 9.5);
    CHECK(p <= 11.5);
}

TEST_CASE("noise grammar") {
    CHECK(parse_noise("gaussian:sigma=50") == NoiseSpec{NoiseVariant::gaussian, 50.0, 0.0, 0});
    CHECK(parse_noise("sp:fraction=0.2") == NoiseSpec{NoiseVariant::salt_pepper, 0.0, 0.2, 0});
    CHECK(parse_noise("mixture:sigma=50,fraction=0.2") == NoiseSpec{NoiseVariant::mixture, 50.0, 0.2, 0});
    CHECK(parse_noise(" gaussian:sigma=50 | sp:fraction=0.2 ") == parse_noise("mixture:fraction=0.2,sigma=50"));

    for (const char *bad : {"", "gaussian", "gaussian:sigma", "gaussian:sigma=abc", "gaussian:fraction=0.1",
                            "poisson:lambda=3", "sp:fraction=1.5", "gaussian:sigma=-1", "sp:fraction=0.2|gaussian:sigma=5",
                            "gaussian:sigma=1,sigma=2", "mixture:sigma=50"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(parse_noise(bad), NoiseSyntaxError);
    }

    for (const auto &spec : {NoiseSpec{NoiseVariant::gaussian, 12.5, 0, 0}, NoiseSpec{NoiseVariant::salt_pepper, 0, 0.05, 0},
                             NoiseSpec{NoiseVariant::mixture, 0.1 + 0.2, 1.0 / 3.0, 0}}) {
        CHECK(parse_noise(format_noise(spec)) == spec);
    }
}

TEST_CASE("corrupt_dataset") {
    TempDir dir;
    const fs::path clean = dir.path() / "clean";
    const fs::path noisy = dir.path() / "noisy";
    fs::create_directories(clean);
    fs::create_directories(noisy);
    for (int i = 0; i < 3; ++i) {
        save_image(test_support::random_image(16, 12, 100 + i), clean / ("img" + std::to_string(2 - i) + ".png"));
        save_image(test_support::random_image(16, 12, 200 + i), noisy / ("img" + std::to_string(2 - i) + ".png"));
    }

    SUBCASE("paired reads noisy from disk in id order") {
        DatasetManifest m{"pairs", DatasetKind::paired, clean, noisy, std::nullopt, 0};
        const auto samples = corrupt_dataset(m);
        REQUIRE(samples.size() == 3);
        CHECK(samples[0].image_id == "img0");
        CHECK(samples[2].image_id == "img2");
        CHECK(samples[0].noisy == load_image(noisy / "img0.png"));
    }
    SUBCASE("paired errors") {
        fs::remove(noisy / "img1.png");
        DatasetManifest m{"pairs", DatasetKind::paired, clean, noisy, std::nullopt, 0};
        CHECK_THROWS_WITH_AS(corrupt_dataset(m), doctest::Contains("img1"), DatasetError);
        save_image(Image(5, 5), noisy / "img1.png");
        CHECK_THROWS_WITH_AS(corrupt_dataset(m), doctest::Contains("dimension mismatch"), DatasetError);
    }
    SUBCASE("test_count") {
        DatasetManifest m{"syn", DatasetKind::synthetic, clean, {}, NoiseSpec{NoiseVariant::gaussian, 10, 0, 1}, 2};
        CHECK(corrupt_dataset(m).size() == 2);
        m.test_count = 4;
        CHECK_THROWS_AS(corrupt_dataset(m), DatasetError);
    }
    SUBCASE("synthetic uses per-image streams") {
        DatasetManifest m{"syn", DatasetKind::synthetic, clean, {}, NoiseSpec{NoiseVariant::mixture, 30, 0.1, 77}, 0};
        const auto samples = corrupt_dataset(m);
        CHECK(samples[1].noisy == mixture(samples[1].clean, 30, 0.1, image_stream_seed(77, "img1")));
    }
}

TEST_CASE("synthetic corruption is identical for 1 and 8 workers") {
    DatasetManifest m{"nat", DatasetKind::synthetic, test_support::data_dir / "natural", {},
                      NoiseSpec{NoiseVariant::mixture, 50, 0.2, 2024}, 8};
    const auto serial = corrupt_dataset(m, 1);
    const auto parallel = corrupt_dataset(m, 8);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].image_id == parallel[i].image_id);
        CHECK(serial[i].noisy == parallel[i].noisy);
    }
}

TEST_CASE("distinct image ids give distinct realizations under one master seed") {
    const Image img(32, 32, 128.0);
    for (int i = 0; i < 100; ++i) {
        const auto a = image_stream_seed(5, "image_" + std::to_string(2 * i));
        const auto b = image_stream_seed(5, "image_" + std::to_string(2 * i + 1));
        CHECK(awgn(img, 50, a) != awgn(img, 50, b));
    }
}
