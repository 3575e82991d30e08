#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "denoise_bench/bm3d.hpp"
#include "denoise_bench/metrics.hpp"
#include "denoise_bench/noise.hpp"
#include "denoise_bench/transforms.hpp"
#include "test_support.hpp"

#include <random>

using namespace denoise_bench;

namespace {

Bm3dParams params_for(double sigma) {
    Bm3dParams p;
    p.sigma = sigma;
    return p;
}

double patch_distance(const Image &img, PatchPosition a, PatchPosition b, std::size_t p) {
    double s = 0;
    for (std::size_t r = 0; r < p; ++r) {
        for (std::size_t c = 0; c < p; ++c) {
            const double d = img(a.row + r, a.col + c) - img(b.row + r, b.col + c);
            s += d * d;
        }
    }
    return s / double(p * p);
}

}  // namespace

TEST_CASE("default parameters") {
    const Bm3dParams p = params_for(25);
    CHECK(p.patch_size == 8);
    CHECK(p.step == 3);
    CHECK(p.search_window == 39);
    CHECK(p.max_matches == 16);
    CHECK(p.hard_lambda == 2.7);
    CHECK(p.match_threshold_hard == 2500);
    CHECK(p.match_threshold_wiener == 400);
    CHECK_NOTHROW(p.validate());

    Bm3dParams bad = p;
    bad.max_matches = 12;
    CHECK_THROWS(bad.validate());
    bad = p;
    bad.search_window = 4;
    CHECK_THROWS(bad.validate());
    bad = p;
    bad.sigma = 0;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("reference grid covers every pixel") {
    for (std::size_t extent = 8; extent < 80; ++extent) {
        for (std::size_t step : {1, 2, 3, 5, 8}) {
            const auto grid = reference_grid(extent, 8, step);
            std::vector<int> covered(extent, 0);
            for (std::size_t g : grid) {
                CHECK(g + 8 <= extent);
                for (std::size_t i = g; i < g + 8; ++i) covered[i] = 1;
            }
            CHECK(std::ranges::count(covered, 0) == 0);
            CHECK(grid.back() == extent - 8);
        }
    }
}

TEST_CASE("block_match on a constant image saturates the group") {
    const Image flat(64, 64, 90.0);
    const auto group = block_match(flat, {30, 30}, params_for(25), 2500);
    CHECK(group.group_size() == 16);
    CHECK(group.member_positions.front() == PatchPosition{30, 30});
    CHECK(group.stack.size() == 16 * 64);
    CHECK(std::ranges::all_of(group.stack, [](double v) { return v == 90.0; }));
}

TEST_CASE("block_match finds exactly one duplicated patch") {
    Image img = test_support::random_image(64, 64, 21);
    const PatchPosition ref{24, 24};
    const PatchPosition dup{24 + 9, 24 - 6};  // on the step-3 grid around ref
    for (std::size_t r = 0; r < 8; ++r) {
        for (std::size_t c = 0; c < 8; ++c) img(dup.row + r, dup.col + c) = img(ref.row + r, ref.col + c);
    }
    const Bm3dParams p = params_for(25);

    // Brute-force check of the fixture: only the duplicate is under threshold on the candidate grid.
    std::size_t under = 0;
    for (int dr = -18; dr <= 18; dr += 3) {
        for (int dc = -18; dc <= 18; dc += 3) {
            if (dr == 0 && dc == 0) continue;
            const PatchPosition cand{std::size_t(24 + dr), std::size_t(24 + dc)};
            if (patch_distance(img, ref, cand, 8) < 2500) ++under;
        }
    }
    REQUIRE(under == 1);

    const auto group = block_match(img, ref, p, 2500);
    REQUIRE(group.group_size() == 2);
    CHECK(group.member_positions[0] == ref);
    CHECK(group.member_positions[1] == dup);
}

TEST_CASE("block_match with zero threshold keeps only the reference") {
    const Image noisy = awgn(Image(48, 48, 128.0), 20, 3);
    const auto group = block_match(noisy, {10, 10}, params_for(20), 0.0);
    CHECK(group.group_size() == 1);
    CHECK(group.member_positions.front() == PatchPosition{10, 10});
}

TEST_CASE("block_match groups are power-of-two, sorted and within the window") {
    const Image img = awgn(test_support::natural_images(1).front(), 25, 4);
    const Bm3dParams p = params_for(25);
    std::mt19937 gen(8);
    for (int trial = 0; trial < 200; ++trial) {
        const PatchPosition ref{gen() % (img.height() - 7), gen() % (img.width() - 7)};
        const double threshold = std::uniform_real_distribution<double>(0, 4000)(gen);
        const auto g = block_match(img, ref, p, threshold);
        CHECK(is_power_of_two(g.group_size()));
        CHECK(g.group_size() <= 16);
        CHECK(g.member_positions.front() == ref);
        double last = 0;
        for (std::size_t m = 1; m < g.group_size(); ++m) {
            const auto pos = g.member_positions[m];
            const double d = patch_distance(img, ref, pos, 8);
            CHECK(d < threshold);
            CHECK(d >= last);
            last = d;
            CHECK((pos.row + 19 >= ref.row && pos.row <= ref.row + 19));
            CHECK((pos.col + 19 >= ref.col && pos.col <= ref.col + 19));
            CHECK((pos.row + 999 - ref.row) % 3 == 999 % 3);
        }
    }
}

TEST_CASE("block_match rejects an out-of-bounds reference") {
    const Image img(20, 20, 0.0);
    CHECK_THROWS_AS(block_match(img, {13, 0}, params_for(10), 100), std::out_of_range);
    CHECK_NOTHROW(block_match(img, {12, 12}, params_for(10), 100));
}

TEST_CASE("hard stage flattens noise on a constant field") {
    const Image noisy = awgn(Image(96, 96, 128.0), 25.0, 11);
    const Image out = bm3d_hard_stage(noisy, params_for(25));
    std::size_t interior = 0, close = 0;
    double sq = 0;
    for (std::size_t r = 8; r < 88; ++r) {
        for (std::size_t c = 8; c < 88; ++c) {
            ++interior;
            close += std::abs(out(r, c) - 128.0) <= 3.0;
            sq += (out(r, c) - 128.0) * (out(r, c) - 128.0);
        }
    }
    // An independent reimplementation puts 92.6-96.5% of interior pixels
    // within 3 levels (residual std 1.7-2.1) across seeds.
    CHECK(double(close) >= 0.90 * double(interior));
    CHECK(std::sqrt(sq / double(interior)) < 2.5);
}

TEST_CASE("hard stage with vanishing sigma is near identity") {
    const Image clean = test_support::natural_images(1).front();
    CHECK(psnr(clean, bm3d_hard_stage(clean, params_for(0.01))) >= 50.0);
}

TEST_CASE("aggregation weights are positive everywhere") {
    const Image noisy = awgn(test_support::natural_images(1).front(), 30, 5);
    const auto hard = bm3d_hard_stage_detailed(noisy, params_for(30));
    CHECK(std::ranges::all_of(hard.weight_sum, [](double w) { return w > 0.0; }));
    const auto wiener = bm3d_wiener_stage_detailed(noisy, quantize(hard.estimate), params_for(30));
    CHECK(std::ranges::all_of(wiener.weight_sum, [](double w) { return w > 0.0; }));

    // Odd sizes exercise the forced last row/column.
    const Image odd = awgn(Image(37, 23, 100.0), 10, 6);
    const auto r = bm3d_hard_stage_detailed(odd, params_for(10));
    CHECK(std::ranges::all_of(r.weight_sum, [](double w) { return w > 0.0; }));
}

TEST_CASE("Wiener stage on a clean constant image returns it") {
    const Image flat(40, 40, 77.0);
    CHECK(bm3d_wiener_stage(flat, flat, params_for(25)) == flat);
}

TEST_CASE("two-stage BM3D on natural images") {
    for (const auto &clean : test_support::natural_images(2)) {
        const Image noisy = awgn(clean, 25.0, 99);
        const Bm3dParams p = params_for(25);
        const Image basic = bm3d_hard_stage(noisy, p);
        const Image full = bm3d_wiener_stage(noisy, basic, p);
        CHECK(full.same_shape(clean));
        CHECK(is_quantized(full));
        CHECK(psnr(clean, full) >= psnr(clean, basic) - 0.1);
        CHECK(psnr(clean, full) > psnr(clean, noisy) + 7.0);
        CHECK(full == bm3d(noisy, 25.0));
    }
}

TEST_CASE("BM3D output does not depend on the worker count") {
    const Image noisy = awgn(test_support::natural_images(1).front(), 50.0, 12);
    const Image serial = bm3d(noisy, 50.0, 1);
    CHECK(bm3d(noisy, 50.0, 3) == serial);
    CHECK(bm3d(noisy, 50.0, 8) == serial);
    CHECK(bm3d(noisy, 50.0, 1) == serial);
}

TEST_CASE("BM3D errors") {
    CHECK_THROWS_AS(bm3d(Image(7, 30), 10), std::invalid_argument);
    CHECK_THROWS_AS(bm3d_wiener_stage(Image(16, 16), Image(16, 17), params_for(10)), std::invalid_argument);
    CHECK_THROWS_AS(bm3d_hard_stage(Image(16, 16), params_for(-1)), std::invalid_argument);
}
