#include "denoise_bench/noise.hpp"

#include "denoise_bench/rng.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

namespace denoise_bench {

std::string_view to_string(NoiseVariant v) {
    switch (v) {
        case NoiseVariant::gaussian: return "gaussian";
        case NoiseVariant::salt_pepper: return "sp";
        case NoiseVariant::mixture: return "mixture";
    }
    return "?";
}

void NoiseSpec::validate() const {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be >= 0");
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw std::invalid_argument("fraction must be in [0, 1]");
}

Image awgn(const Image &img, double sigma, std::uint64_t stream_seed) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("awgn: negative sigma");
    Image out = img;
    auto px = out.pixels();
    if (sigma > 0.0) {
        for (std::size_t i = 0; i < px.size(); ++i) {
            px[i] += sigma * rng::standard_normal(stream_seed, i);
        }
    }
    return quantize(out);
}

Image salt_pepper(const Image &img, double fraction, std::uint64_t stream_seed) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw std::invalid_argument("salt_pepper: fraction outside [0, 1]");
    Image out = img;
    auto px = out.pixels();
    const std::size_t n = px.size();
    const auto count = std::size_t(round_half_away(fraction * double(n)));
    const std::size_t pepper = count - count / 2;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + std::size_t(rng::below(stream_seed, i, n - i));
        std::swap(order[i], order[j]);
        px[order[i]] = i < pepper ? 0.0 : 255.0;
    }
    return out;
}

Image mixture(const Image &img, double sigma, double fraction, std::uint64_t stream_seed) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw std::invalid_argument("mixture: fraction outside [0, 1]");
    const Image gaussian = awgn(img, sigma, rng::derive_seed(stream_seed, "awgn"));
    return salt_pepper(gaussian, fraction, rng::derive_seed(stream_seed, "sp"));
}

Image apply_noise(const Image &img, const NoiseSpec &spec, std::uint64_t stream_seed) {
    switch (spec.variant) {
        case NoiseVariant::gaussian: return awgn(img, spec.sigma, stream_seed);
        case NoiseVariant::salt_pepper: return salt_pepper(img, spec.fraction, stream_seed);
        case NoiseVariant::mixture: return mixture(img, spec.sigma, spec.fraction, stream_seed);
    }
    throw std::logic_error("unknown noise variant");
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

struct Stage {
    std::string name;
    std::optional<double> sigma;
    std::optional<double> fraction;
};

double parse_number(std::string_view text, std::string_view key) {
    text = trim(text);
    double value = 0.0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size() || text.empty()) {
        throw NoiseSyntaxError(fmt::format("bad number '{}' for '{}'", text, key));
    }
    return value;
}

Stage parse_stage(std::string_view text) {
    text = trim(text);
    Stage stage;
    const auto colon = text.find(':');
    stage.name = std::string(trim(text.substr(0, colon)));
    if (stage.name != "gaussian" && stage.name != "sp" && stage.name != "mixture") {
        throw NoiseSyntaxError(fmt::format("unknown noise '{}'", stage.name));
    }
    if (colon == std::string_view::npos) return stage;

    std::string_view params = text.substr(colon + 1);
    while (true) {
        const auto comma = params.find(',');
        const std::string_view param = trim(params.substr(0, comma));
        const auto eq = param.find('=');
        if (eq == std::string_view::npos) throw NoiseSyntaxError(fmt::format("expected key=value, got '{}'", param));
        const std::string_view key = trim(param.substr(0, eq));
        const double value = parse_number(param.substr(eq + 1), key);
        std::optional<double> *slot = nullptr;
        if (key == "sigma" && stage.name != "sp") slot = &stage.sigma;
        if (key == "fraction" && stage.name != "gaussian") slot = &stage.fraction;
        if (!slot) throw NoiseSyntaxError(fmt::format("'{}' takes no parameter '{}'", stage.name, key));
        if (slot->has_value()) throw NoiseSyntaxError(fmt::format("duplicate parameter '{}'", key));
        *slot = value;
        if (comma == std::string_view::npos) break;
        params.remove_prefix(comma + 1);
    }
    return stage;
}

double require(const std::optional<double> &v, std::string_view stage, std::string_view key) {
    if (!v) throw NoiseSyntaxError(fmt::format("'{}' requires '{}'", stage, key));
    return *v;
}

}  // namespace

NoiseSpec parse_noise(std::string_view text) {
    std::vector<Stage> stages;
    while (true) {
        const auto bar = text.find('|');
        stages.push_back(parse_stage(text.substr(0, bar)));
        if (bar == std::string_view::npos) break;
        text.remove_prefix(bar + 1);
    }

    NoiseSpec spec;
    if (stages.size() == 1) {
        const Stage &s = stages.front();
        if (s.name == "gaussian") {
            spec.variant = NoiseVariant::gaussian;
            spec.sigma = require(s.sigma, s.name, "sigma");
        } else if (s.name == "sp") {
            spec.variant = NoiseVariant::salt_pepper;
            spec.fraction = require(s.fraction, s.name, "fraction");
        } else {
            spec.variant = NoiseVariant::mixture;
            spec.sigma = require(s.sigma, s.name, "sigma");
            spec.fraction = require(s.fraction, s.name, "fraction");
        }
    } else if (stages.size() == 2 && stages[0].name == "gaussian" && stages[1].name == "sp") {
        spec.variant = NoiseVariant::mixture;
        spec.sigma = require(stages[0].sigma, "gaussian", "sigma");
        spec.fraction = require(stages[1].fraction, "sp", "fraction");
    } else {
        throw NoiseSyntaxError("only 'gaussian|sp' composition is supported");
    }

    try {
        spec.validate();
    } catch (const std::invalid_argument &e) {
        throw NoiseSyntaxError(e.what());
    }
    return spec;
}

std::string format_noise(const NoiseSpec &spec) {
    switch (spec.variant) {
        case NoiseVariant::gaussian: return fmt::format("gaussian:sigma={}", spec.sigma);
        case NoiseVariant::salt_pepper: return fmt::format("sp:fraction={}", spec.fraction);
        case NoiseVariant::mixture: return fmt::format("mixture:sigma={},fraction={}", spec.sigma, spec.fraction);
    }
    return {};
}

}  // namespace denoise_bench
