#include "denoise_bench/manifest.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace denoise_bench {

namespace fs = std::filesystem;
using nlohmann::json;

void RunManifest::validate() const {
    if (datasets.empty()) throw ManifestError("manifest has no datasets");
    if (methods.empty()) throw ManifestError("manifest has no methods");
    if (output_dir.empty()) throw ManifestError("manifest has no output_dir");
    if (timing_repeats != 0 && timing_repeats < 3) throw ManifestError("timing_repeats must be 0 or >= 3");
    std::set<std::string> names;
    for (const auto &d : datasets) {
        try {
            d.validate();
        } catch (const std::exception &e) {
            throw ManifestError(e.what());
        }
        if (!names.insert("d/" + d.name).second) throw ManifestError("duplicate dataset name '" + d.name + "'");
        if (d.name.find_first_of("/,\"\n") != std::string::npos || d.name == "inputs") {
            throw ManifestError("invalid dataset name '" + d.name + "'");
        }
    }
    for (const auto &m : methods) {
        try {
            m.validate();
        } catch (const std::exception &e) {
            throw ManifestError(e.what());
        }
        if (!names.insert("m/" + m.name).second) throw ManifestError("duplicate method name '" + m.name + "'");
        if (m.name.find_first_of("/,\"\n") != std::string::npos || m.name == "inputs") {
            throw ManifestError("invalid method name '" + m.name + "'");
        }
    }
}

namespace {

fs::path resolve(const fs::path &base, const std::string &p) {
    const fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

NoiseVariant parse_variant(const std::string &s) {
    if (s == "gaussian") return NoiseVariant::gaussian;
    if (s == "sp" || s == "salt_pepper") return NoiseVariant::salt_pepper;
    if (s == "mixture") return NoiseVariant::mixture;
    throw ManifestError("unknown noise variant '" + s + "'");
}

std::string variant_name(NoiseVariant v) {
    switch (v) {
        case NoiseVariant::gaussian: return "gaussian";
        case NoiseVariant::salt_pepper: return "salt_pepper";
        case NoiseVariant::mixture: return "mixture";
    }
    return "?";
}

DatasetManifest parse_dataset(const json &j, const fs::path &base, std::uint64_t master_seed) {
    DatasetManifest d;
    d.name = j.at("name").get<std::string>();
    const std::string kind = j.value("kind", "synthetic");
    if (kind == "synthetic") {
        d.kind = DatasetKind::synthetic;
    } else if (kind == "paired") {
        d.kind = DatasetKind::paired;
    } else {
        throw ManifestError("unknown dataset kind '" + kind + "'");
    }
    d.clean_dir = resolve(base, j.at("clean_dir").get<std::string>());
    if (j.contains("noisy_dir")) d.noisy_dir = resolve(base, j.at("noisy_dir").get<std::string>());
    if (j.contains("noise")) {
        const json &n = j.at("noise");
        NoiseSpec spec;
        spec.variant = parse_variant(n.at("variant").get<std::string>());
        spec.sigma = n.value("sigma", 0.0);
        spec.fraction = n.value("fraction", 0.0);
        spec.master_seed = n.value("seed", master_seed);
        d.noise = spec;
    }
    d.test_count = j.value("test_count", std::size_t{0});
    return d;
}

DenoiserDescriptor parse_method(const json &j, const fs::path &base) {
    DenoiserDescriptor m;
    m.name = j.at("name").get<std::string>();
    if (j.contains("builtin") == j.contains("command")) {
        throw ManifestError(fmt::format("method '{}' needs exactly one of 'builtin' or 'command'", m.name));
    }
    if (j.contains("builtin")) {
        m.kind = DenoiserKind::builtin;
        const auto id = parse_builtin_id(j.at("builtin").get<std::string>());
        if (!id) throw ManifestError(fmt::format("method '{}': unknown builtin", m.name));
        m.builtin_id = *id;
    } else {
        m.kind = DenoiserKind::external;
        m.command = j.at("command").get<std::vector<std::string>>();
        // A relative executable path is relative to the manifest; bare names go through PATH.
        if (!m.command.empty() && m.command[0].find('/') != std::string::npos) {
            m.command[0] = resolve(base, m.command[0]).lexically_normal().string();
        }
    }
    if (j.contains("params")) m.parameters = j.at("params").get<std::map<std::string, double>>();
    m.timeout_s = j.value("timeout", m.timeout_s);
    m.batch = j.value("batch", m.batch);
    return m;
}

}  // namespace

RunManifest parse_manifest(std::string_view json_text, const fs::path &base_dir) {
    RunManifest m;
    try {
        const json j = json::parse(json_text);
        m.master_seed = j.value("master_seed", std::uint64_t{0});
        m.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
        if (j.contains("metrics")) {
            m.score_psnr = m.score_ssim = false;
            for (const auto &name : j.at("metrics").get<std::vector<std::string>>()) {
                if (name == "psnr") {
                    m.score_psnr = true;
                } else if (name == "ssim") {
                    m.score_ssim = true;
                } else {
                    throw ManifestError("unknown metric '" + name + "'");
                }
            }
        }
        const std::string timing = j.value("timing", "batch");
        if (timing == "batch") {
            m.timing = TimingMode::batch;
        } else if (timing == "per_image") {
            m.timing = TimingMode::per_image;
        } else {
            throw ManifestError("unknown timing mode '" + timing + "'");
        }
        m.timing_repeats = j.value("timing_repeats", std::size_t{0});
        for (const auto &d : j.at("datasets")) m.datasets.push_back(parse_dataset(d, base_dir, m.master_seed));
        for (const auto &d : j.at("methods")) m.methods.push_back(parse_method(d, base_dir));
    } catch (const json::exception &e) {
        throw ManifestError(std::string("malformed manifest: ") + e.what());
    }
    m.validate();
    return m;
}

RunManifest load_manifest(const fs::path &path) {
    std::ifstream in(path);
    if (!in) throw ManifestError("cannot read manifest " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_manifest(ss.str(), path.parent_path());
}

std::string serialize_manifest(const RunManifest &m) {
    json j;
    j["master_seed"] = m.master_seed;
    j["output_dir"] = m.output_dir.string();
    json metrics = json::array();
    if (m.score_psnr) metrics.push_back("psnr");
    if (m.score_ssim) metrics.push_back("ssim");
    j["metrics"] = metrics;
    j["timing"] = m.timing == TimingMode::batch ? "batch" : "per_image";
    j["timing_repeats"] = m.timing_repeats;
    j["datasets"] = json::array();
    for (const auto &d : m.datasets) {
        json jd;
        jd["name"] = d.name;
        jd["kind"] = d.kind == DatasetKind::synthetic ? "synthetic" : "paired";
        jd["clean_dir"] = d.clean_dir.string();
        if (!d.noisy_dir.empty()) jd["noisy_dir"] = d.noisy_dir.string();
        if (d.noise) {
            jd["noise"] = {{"variant", variant_name(d.noise->variant)},
                           {"sigma", d.noise->sigma},
                           {"fraction", d.noise->fraction},
                           {"seed", d.noise->master_seed}};
        }
        jd["test_count"] = d.test_count;
        j["datasets"].push_back(jd);
    }
    j["methods"] = json::array();
    for (const auto &d : m.methods) {
        json jm;
        jm["name"] = d.name;
        if (d.kind == DenoiserKind::builtin) {
            jm["builtin"] = std::string(to_string(d.builtin_id));
        } else {
            jm["command"] = d.command;
        }
        jm["params"] = d.parameters;
        jm["timeout"] = d.timeout_s;
        jm["batch"] = d.batch;
        j["methods"].push_back(jm);
    }
    return j.dump(2) + "\n";
}

}  // namespace denoise_bench
