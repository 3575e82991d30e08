#pragma once

#include "denoise_bench/image.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace denoise_bench {

enum class NoiseVariant { gaussian, salt_pepper, mixture };

std::string_view to_string(NoiseVariant v);

/// Declarative corruption. `sigma` applies to gaussian and mixture,
/// `fraction` to salt_pepper and mixture.
struct NoiseSpec {
    NoiseVariant variant = NoiseVariant::gaussian;
    double sigma = 0.0;
    double fraction = 0.0;
    std::uint64_t master_seed = 0;

    void validate() const;
    friend bool operator==(const NoiseSpec &, const NoiseSpec &) = default;
};

class NoiseSyntaxError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Adds N(0, sigma^2) per pixel, keyed by (stream_seed, pixel index), then quantizes.
Image awgn(const Image &img, double sigma, std::uint64_t stream_seed);

/// Sets exactly round(fraction * N) pixels chosen by a seeded partial
/// Fisher-Yates shuffle: the first ceil(k/2) to 0, the rest to 255.
Image salt_pepper(const Image &img, double fraction, std::uint64_t stream_seed);

/// AWGN followed by salt-and-pepper, with sub-seeds derived from stream_seed.
Image mixture(const Image &img, double sigma, double fraction, std::uint64_t stream_seed);

Image apply_noise(const Image &img, const NoiseSpec &spec, std::uint64_t stream_seed);

/// Parses the pipeline grammar
///
///   pipeline := stage ( "|" stage )*
///   stage    := name [ ":" param ( "," param )* ]
///   param    := key "=" number
///   name     := "gaussian" | "sp" | "mixture"
///
/// `gaussian:sigma=S|sp:fraction=F` is the mixture regime and parses to the
/// same NoiseSpec as `mixture:sigma=S,fraction=F`. The seed is left at 0.
NoiseSpec parse_noise(std::string_view text);

/// Inverse of parse_noise (canonical single-stage form, seed omitted).
std::string format_noise(const NoiseSpec &spec);

}  // namespace denoise_bench
