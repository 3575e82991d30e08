#pragma once

#include "denoise_bench/image.hpp"
#include "denoise_bench/noise.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace denoise_bench {

enum class DatasetKind { synthetic, paired };

/// A named corpus. Synthetic datasets generate noisy images from `noise`;
/// paired datasets read same-named files from `noisy_dir`.
struct DatasetManifest {
    std::string name;
    DatasetKind kind = DatasetKind::synthetic;
    std::filesystem::path clean_dir;
    std::filesystem::path noisy_dir;
    std::optional<NoiseSpec> noise;
    /// Number of images evaluated, taken in lexicographic id order. 0 means all.
    std::size_t test_count = 0;

    void validate() const;
};

struct Sample {
    std::string image_id;
    Image clean;
    Image noisy;
};

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Image files (.png/.pgm) in `dir`, sorted by stem. Duplicate stems are an error.
std::vector<std::filesystem::path> list_images(const std::filesystem::path &dir);

/// Per-image stream seed for synthetic corruption.
std::uint64_t image_stream_seed(std::uint64_t master_seed, const std::string &image_id);

/// Clean/noisy triples in lexicographic image_id order, for any `jobs`.
std::vector<Sample> corrupt_dataset(const DatasetManifest &manifest, std::size_t jobs = 1);

}  // namespace denoise_bench
