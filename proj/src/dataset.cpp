#include "denoise_bench/dataset.hpp"

#include "denoise_bench/parallel.hpp"
#include "denoise_bench/rng.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace denoise_bench {

namespace fs = std::filesystem;

void DatasetManifest::validate() const {
    if (name.empty()) throw DatasetError("dataset without a name");
    if (kind == DatasetKind::synthetic) {
        if (!noise) throw DatasetError(fmt::format("synthetic dataset '{}' has no noise spec", name));
        noise->validate();
    } else if (noisy_dir.empty()) {
        throw DatasetError(fmt::format("paired dataset '{}' has no noisy_dir", name));
    }
}

std::vector<fs::path> list_images(const fs::path &dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw DatasetError("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto &entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
    }
    std::ranges::sort(files, [](const fs::path &a, const fs::path &b) {
        return a.stem().string() < b.stem().string();
    });
    for (std::size_t i = 1; i < files.size(); ++i) {
        if (files[i].stem() == files[i - 1].stem()) {
            throw DatasetError(fmt::format("duplicate image id '{}' in {}", files[i].stem().string(), dir.string()));
        }
    }
    return files;
}

std::uint64_t image_stream_seed(std::uint64_t master_seed, const std::string &image_id) {
    return rng::derive_seed(master_seed, image_id);
}

std::vector<Sample> corrupt_dataset(const DatasetManifest &manifest, std::size_t jobs) {
    manifest.validate();
    auto files = list_images(manifest.clean_dir);
    if (manifest.test_count > files.size()) {
        throw DatasetError(fmt::format("dataset '{}': test_count {} exceeds corpus size {}", manifest.name,
                                       manifest.test_count, files.size()));
    }
    if (manifest.test_count > 0) files.resize(manifest.test_count);

    std::vector<fs::path> noisy_files;
    if (manifest.kind == DatasetKind::paired) {
        for (const auto &clean : files) {
            const fs::path noisy = manifest.noisy_dir / clean.filename();
            if (!fs::is_regular_file(noisy)) {
                throw DatasetError(fmt::format("dataset '{}': missing pair file for '{}'", manifest.name,
                                               clean.stem().string()));
            }
            noisy_files.push_back(noisy);
        }
    }

    std::vector<std::optional<Sample>> slots(files.size());
    parallel_for(files.size(), jobs, [&](std::size_t i) {
        std::string id = files[i].stem().string();
        Image clean = load_image(files[i]);
        if (manifest.kind == DatasetKind::paired) {
            Image noisy = load_image(noisy_files[i]);
            if (!noisy.same_shape(clean)) {
                throw DatasetError(fmt::format("dataset '{}': dimension mismatch in pair '{}'", manifest.name, id));
            }
            slots[i] = Sample{std::move(id), std::move(clean), std::move(noisy)};
        } else {
            Image noisy = apply_noise(clean, *manifest.noise, image_stream_seed(manifest.noise->master_seed, id));
            slots[i] = Sample{std::move(id), std::move(clean), std::move(noisy)};
        }
    });

    std::vector<Sample> samples;
    samples.reserve(slots.size());
    for (auto &slot : slots) samples.push_back(std::move(*slot));
    return samples;
}

}  // namespace denoise_bench
