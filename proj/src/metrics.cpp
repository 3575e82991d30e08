#include "denoise_bench/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>

namespace denoise_bench {

double psnr(const Image &reference, const Image &test) {
    if (!reference.same_shape(test)) {
        throw MetricError(fmt::format("psnr: dimension mismatch {}x{} vs {}x{}", reference.width(),
                                      reference.height(), test.width(), test.height()));
    }
    const auto a = reference.pixels();
    const auto b = test.pixels();
    double sse = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sse += d * d;
    }
    if (sse == 0.0) return psnr_infinite;
    const double mse = sse / double(a.size());
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

namespace {

std::array<double, ssim_window> gaussian_taps() {
    std::array<double, ssim_window> taps{};
    const double centre = double(ssim_window / 2);
    double sum = 0.0;
    for (std::size_t i = 0; i < ssim_window; ++i) {
        const double d = double(i) - centre;
        taps[i] = std::exp(-d * d / (2.0 * ssim_window_sigma * ssim_window_sigma));
        sum += taps[i];
    }
    for (double &t : taps) t /= sum;
    return taps;
}

// Separable "valid" filtering: output is (h - 10) x (w - 10).
std::vector<double> filter_valid(const std::vector<double> &src, std::size_t w, std::size_t h,
                                 const std::array<double, ssim_window> &taps) {
    const std::size_t ow = w - ssim_window + 1;
    const std::size_t oh = h - ssim_window + 1;
    std::vector<double> rows(h * ow);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < ow; ++c) {
            double acc = 0.0;
            for (std::size_t k = 0; k < ssim_window; ++k) acc += taps[k] * src[r * w + c + k];
            rows[r * ow + c] = acc;
        }
    }
    std::vector<double> out(oh * ow);
    for (std::size_t r = 0; r < oh; ++r) {
        for (std::size_t c = 0; c < ow; ++c) {
            double acc = 0.0;
            for (std::size_t k = 0; k < ssim_window; ++k) acc += taps[k] * rows[(r + k) * ow + c];
            out[r * ow + c] = acc;
        }
    }
    return out;
}

}  // namespace

double ssim(const Image &reference, const Image &test) {
    if (!reference.same_shape(test)) {
        throw MetricError(fmt::format("ssim: dimension mismatch {}x{} vs {}x{}", reference.width(),
                                      reference.height(), test.width(), test.height()));
    }
    const std::size_t w = reference.width();
    const std::size_t h = reference.height();
    if (w < ssim_window || h < ssim_window) {
        throw MetricError(fmt::format("ssim: image {}x{} smaller than the {}x{} window", w, h, ssim_window,
                                      ssim_window));
    }

    static const auto taps = gaussian_taps();
    const auto a = reference.pixels();
    const auto b = test.pixels();
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
    }
    const auto mu_x = filter_valid(x, w, h, taps);
    const auto mu_y = filter_valid(y, w, h, taps);
    const auto e_xx = filter_valid(xx, w, h, taps);
    const auto e_yy = filter_valid(yy, w, h, taps);
    const auto e_xy = filter_valid(xy, w, h, taps);

    double total = 0.0;
    for (std::size_t i = 0; i < mu_x.size(); ++i) {
        const double mxy = mu_x[i] * mu_y[i];
        const double mxx = mu_x[i] * mu_x[i];
        const double myy = mu_y[i] * mu_y[i];
        const double var_x = e_xx[i] - mxx;
        const double var_y = e_yy[i] - myy;
        const double cov = e_xy[i] - mxy;
        total += ((2.0 * mxy + ssim_c1) * (2.0 * cov + ssim_c2)) /
                 ((mxx + myy + ssim_c1) * (var_x + var_y + ssim_c2));
    }
    return total / double(mu_x.size());
}

double percentile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw MetricError("percentile of empty sequence");
    const double h = double(sorted.size() - 1) * q;
    const auto lo = std::size_t(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - double(lo)) * (sorted[lo + 1] - sorted[lo]);
}

AggregateStats aggregate(std::span<const double> values) {
    if (values.empty()) throw MetricError("aggregate of empty sequence");
    std::vector<double> sorted(values.begin(), values.end());
    std::ranges::sort(sorted);
    AggregateStats s;
    s.count = sorted.size();
    s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / double(sorted.size());
    s.median = percentile_sorted(sorted, 0.50);
    s.p10 = percentile_sorted(sorted, 0.10);
    s.p25 = percentile_sorted(sorted, 0.25);
    s.p75 = percentile_sorted(sorted, 0.75);
    s.p90 = percentile_sorted(sorted, 0.90);
    return s;
}

namespace {

// Sum of t(t-1)/2 over runs of equal values (input sorted on the compared key).
template <typename Eq>
std::int64_t tied_pairs(std::size_t n, Eq &&equal) {
    std::int64_t total = 0;
    std::int64_t run = 1;
    for (std::size_t i = 1; i <= n; ++i) {
        if (i < n && equal(i - 1, i)) {
            ++run;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    return total;
}

// Stable merge sort of `v`, returning the number of inversions (pairs i < j with v[i] > v[j]).
std::int64_t sort_counting_inversions(std::vector<double> &v, std::vector<double> &scratch, std::size_t lo,
                                      std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::int64_t swaps = sort_counting_inversions(v, scratch, lo, mid) + sort_counting_inversions(v, scratch, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            swaps += std::int64_t(mid - i);
            scratch[k++] = v[j++];
        } else {
            scratch[k++] = v[i++];
        }
    }
    while (i < mid) scratch[k++] = v[i++];
    while (j < hi) scratch[k++] = v[j++];
    std::copy(scratch.begin() + std::ptrdiff_t(lo), scratch.begin() + std::ptrdiff_t(hi), v.begin() + std::ptrdiff_t(lo));
    return swaps;
}

}  // namespace

double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw MetricError("kendall_tau_b: length mismatch");
    const std::size_t n = x.size();
    if (n < 2) return 1.0;

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::ranges::sort(idx, [&](std::size_t a, std::size_t b) {
        return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
    });

    const std::int64_t total = std::int64_t(n) * std::int64_t(n - 1) / 2;
    const std::int64_t x_ties = tied_pairs(n, [&](std::size_t i, std::size_t j) { return x[idx[i]] == x[idx[j]]; });
    const std::int64_t joint_ties = tied_pairs(n, [&](std::size_t i, std::size_t j) {
        return x[idx[i]] == x[idx[j]] && y[idx[i]] == y[idx[j]];
    });

    std::vector<double> ys(n), scratch(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];
    const std::int64_t discordant = sort_counting_inversions(ys, scratch, 0, n);
    const std::int64_t y_ties = tied_pairs(n, [&](std::size_t i, std::size_t j) { return ys[i] == ys[j]; });

    const double numerator = double(total - x_ties - y_ties + joint_ties - 2 * discordant);
    const double denominator = std::sqrt(double(total - x_ties) * double(total - y_ties));
    if (denominator == 0.0) return std::nan("");
    return numerator / denominator;
}

double kendall_tau(const MethodRanking &a, const MethodRanking &b) {
    if (a.ordered_methods.size() != a.scores.size() || b.ordered_methods.size() != b.scores.size()) {
        throw MetricError("kendall_tau: ranking with misaligned scores");
    }
    std::map<std::string, double> b_scores;
    for (std::size_t i = 0; i < b.ordered_methods.size(); ++i) {
        if (!b_scores.emplace(b.ordered_methods[i], b.scores[i]).second) {
            throw MetricError("kendall_tau: duplicate method '" + b.ordered_methods[i] + "'");
        }
    }
    if (b_scores.size() != a.ordered_methods.size()) throw MetricError("kendall_tau: method-set mismatch");

    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < a.ordered_methods.size(); ++i) {
        auto it = b_scores.find(a.ordered_methods[i]);
        if (it == b_scores.end()) {
            throw MetricError("kendall_tau: method-set mismatch on '" + a.ordered_methods[i] + "'");
        }
        xs.push_back(a.scores[i]);
        ys.push_back(it->second);
    }
    return kendall_tau_b(xs, ys);
}

MethodRanking rank_methods(std::span<const EvaluationRecord> records, const std::string &regime) {
    struct Acc {
        double sum = 0.0;
        std::size_t finite = 0;
    };
    std::map<std::string, Acc> per_method;
    for (const auto &r : records) {
        if (r.dataset != regime) continue;
        auto &acc = per_method[r.method];
        if (std::isfinite(r.psnr_db)) {
            acc.sum += r.psnr_db;
            ++acc.finite;
        }
    }
    if (per_method.empty()) throw MetricError("rank_methods: no records for '" + regime + "'");

    std::vector<std::pair<std::string, double>> entries;
    for (const auto &[method, acc] : per_method) {
        entries.emplace_back(method, acc.finite ? acc.sum / double(acc.finite) : psnr_infinite);
    }
    std::ranges::sort(entries, [](const auto &l, const auto &r) {
        return l.second != r.second ? l.second > r.second : l.first < r.first;
    });

    MethodRanking ranking;
    ranking.noise_regime = regime;
    for (auto &[method, score] : entries) {
        ranking.ordered_methods.push_back(method);
        ranking.scores.push_back(score);
    }
    return ranking;
}

}  // namespace denoise_bench
