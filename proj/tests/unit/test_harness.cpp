#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "denoise_bench/bm3d.hpp"
#include "denoise_bench/denoisers.hpp"
#include "denoise_bench/harness.hpp"
#include "denoise_bench/manifest.hpp"
#include "denoise_bench/metrics.hpp"
#include "denoise_bench/report.hpp"
#include "denoise_bench/tempdir.hpp"
#include "test_support.hpp"

#include <fmt/format.h>

#include <fstream>

using namespace denoise_bench;
namespace fs = std::filesystem;

namespace {

// 64x64 crops of the first `count` natural images.
void write_corpus(const fs::path &dir, std::size_t count, std::size_t side = 64) {
    fs::create_directories(dir);
    const auto images = test_support::natural_images(count);
    for (std::size_t i = 0; i < images.size(); ++i) {
        Image crop(side, side);
        for (std::size_t r = 0; r < side; ++r) {
            for (std::size_t c = 0; c < side; ++c) crop(r, c) = images[i](96 + r, 96 + c);
        }
        save_image(crop, dir / fmt::format("im{:02}.png", i));
    }
}

DenoiserDescriptor builtin(const std::string &name, BuiltinId id, std::map<std::string, double> params = {}) {
    DenoiserDescriptor d;
    d.name = name;
    d.builtin_id = id;
    d.parameters = std::move(params);
    return d;
}

DenoiserDescriptor external(const std::string &name, std::vector<std::string> command) {
    DenoiserDescriptor d;
    d.name = name;
    d.kind = DenoiserKind::external;
    d.command = std::move(command);
    d.timeout_s = 20;
    return d;
}

DatasetManifest gaussian_dataset(const fs::path &clean, double sigma = 25) {
    DatasetManifest d;
    d.name = "gaussian";
    d.clean_dir = clean;
    d.noise = NoiseSpec{.variant = NoiseVariant::gaussian, .sigma = sigma, .master_seed = 7};
    return d;
}

RunManifest three_builtins(const fs::path &clean, const fs::path &out) {
    RunManifest m;
    m.datasets = {gaussian_dataset(clean)};
    m.methods = {builtin("identity", BuiltinId::identity), builtin("median", BuiltinId::median),
                 builtin("bm3d", BuiltinId::bm3d)};
    m.master_seed = 7;
    m.output_dir = out;
    return m;
}

std::string csv_without_wall_time(std::vector<EvaluationRecord> records) {
    for (auto &r : records) r.wall_time_s = 0;
    return format_csv(records);
}

}  // namespace

TEST_CASE("identity records reproduce the noisy PSNR exactly") {
    TempDir root;
    write_corpus(root.path() / "clean", 3);
    RunManifest m = three_builtins(root.path() / "clean", root.path() / "out");
    m.methods.resize(1);
    const auto result = run_benchmark(m);
    REQUIRE(result.failures.empty());
    const auto samples = corrupt_dataset(m.datasets[0]);
    REQUIRE(result.records.size() == samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto &rec = result.records[i];
        CHECK(rec.image_id == samples[i].image_id);
        CHECK(rec.psnr_db == psnr(samples[i].clean, samples[i].noisy));
        CHECK(rec.ssim == ssim(samples[i].clean, samples[i].noisy));
        CHECK(rec.wall_time_s >= 0.0);
    }
}

TEST_CASE("three images by three built-ins give nine records with outputs on disk") {
    TempDir root;
    write_corpus(root.path() / "clean", 3);
    const RunManifest m = three_builtins(root.path() / "clean", root.path() / "out");
    const auto result = run_benchmark(m);
    CHECK(result.failures.empty());
    REQUIRE(result.records.size() == 9);
    for (const auto &rec : result.records) {
        CHECK(rec.output_path == fmt::format("{}/{}/{}.png", rec.method, rec.dataset, rec.image_id));
        const Image out = load_image(m.output_dir / rec.output_path);
        CHECK(is_quantized(out));
        CHECK(out.width() == 64);
    }
    for (const auto &id : {"im00", "im01", "im02"}) CHECK(fs::exists(m.output_dir / "inputs/gaussian" / fmt::format("{}.png", id)));
    CHECK(result.timings.empty());
}

TEST_CASE("reruns agree regardless of worker count") {
    TempDir root;
    write_corpus(root.path() / "clean", 3);
    RunManifest a = three_builtins(root.path() / "clean", root.path() / "a");
    DatasetManifest sp;
    sp.name = "sp";
    sp.clean_dir = root.path() / "clean";
    sp.noise = NoiseSpec{.variant = NoiseVariant::salt_pepper, .fraction = 0.2, .master_seed = 7};
    a.datasets.push_back(sp);
    a.methods[2].parameters["sigma"] = 30;
    RunManifest b = a;
    b.output_dir = root.path() / "b";
    const auto ra = run_benchmark(a, {.jobs = 1});
    const auto rb = run_benchmark(b, {.jobs = 8});
    CHECK(ra.records.size() == 18);
    CHECK(csv_without_wall_time(ra.records) == csv_without_wall_time(rb.records));
    CHECK(fingerprint_directory(a.output_dir / "bm3d/sp") == fingerprint_directory(b.output_dir / "bm3d/sp"));
}

TEST_CASE("a failing method does not stop the others") {
    TempDir root;
    write_corpus(root.path() / "clean", 2);
    RunManifest m = three_builtins(root.path() / "clean", root.path() / "out");
    m.methods = {builtin("identity", BuiltinId::identity),
                 external("crashes", {test_support::plugin("nonzero_exit.sh")}),
                 external("absent", {"/nonexistent/plugin"}),
                 external("plugin-identity", {test_support::plugin("identity.sh")}),
                 builtin("median", BuiltinId::median)};
    const auto result = run_benchmark(m);
    REQUIRE(result.failures.size() == 2);
    CHECK(result.failures[0].method == "crashes");
    CHECK(result.failures[1].method == "absent");
    // Completeness: datasets x methods x images minus logged failures.
    CHECK(result.records.size() == 1 * 5 * 2 - 2 * 2);

    const std::string log = [&] {
        std::ifstream in(m.output_dir / "run.log");
        return std::string(std::istreambuf_iterator<char>(in), {});
    }();
    CHECK(log.find("model weights not found") != std::string::npos);
    CHECK(log.find("absent") != std::string::npos);

    // External identity and built-in identity score identically.
    for (const auto &rec : result.records) {
        if (rec.method != "plugin-identity") continue;
        const auto twin = std::ranges::find_if(result.records, [&](const EvaluationRecord &r) {
            return r.method == "identity" && r.image_id == rec.image_id;
        });
        REQUIRE(twin != result.records.end());
        CHECK(twin->psnr_db == rec.psnr_db);
        CHECK(twin->ssim == rec.ssim);
    }
}

TEST_CASE("per-image timing mode and the timing pass") {
    TempDir root;
    write_corpus(root.path() / "clean", 2);
    RunManifest m = three_builtins(root.path() / "clean", root.path() / "out");
    m.methods = {builtin("identity", BuiltinId::identity), external("ext", {test_support::plugin("identity.sh")})};
    m.timing = TimingMode::per_image;
    m.timing_repeats = 3;
    m.score_ssim = false;
    const auto result = run_benchmark(m);
    REQUIRE(result.records.size() == 4);
    for (const auto &rec : result.records) {
        CHECK(std::isnan(rec.ssim));
        CHECK((rec.wall_time_s > 0.0 || rec.method == "identity"));
    }
    REQUIRE(result.timings.size() == 2);
    for (const auto &t : result.timings) CHECK(t.timing.samples_s.size() == 3);
}

TEST_CASE("paired datasets and test_count") {
    TempDir root;
    write_corpus(root.path() / "clean", 4);
    fs::create_directories(root.path() / "noisy");
    for (const auto &p : list_images(root.path() / "clean")) {
        save_image(salt_pepper(load_image(p), 0.1, 3), root.path() / "noisy" / p.filename());
    }
    RunManifest m = three_builtins(root.path() / "clean", root.path() / "out");
    m.datasets[0].name = "paired";
    m.datasets[0].kind = DatasetKind::paired;
    m.datasets[0].noise.reset();
    m.datasets[0].noisy_dir = root.path() / "noisy";
    m.datasets[0].test_count = 3;
    m.methods = {builtin("identity", BuiltinId::identity), builtin("bm3d", BuiltinId::bm3d)};
    const auto result = run_benchmark(m);
    // bm3d has no sigma for a paired dataset without one.
    REQUIRE(result.failures.size() == 1);
    CHECK(result.failures[0].method == "bm3d");
    CHECK(result.records.size() == 3);
}

TEST_CASE("run_builtin parameters") {
    const Image noisy = awgn(Image(32, 32, 100.0), 20, 1);
    CHECK(run_builtin(builtin("m", BuiltinId::median), noisy, std::nullopt) == median_denoise(noisy, 1));
    CHECK(run_builtin(builtin("m", BuiltinId::median, {{"radius", 2}}), noisy, std::nullopt) ==
          median_denoise(noisy, 2));
    CHECK(run_builtin(builtin("b", BuiltinId::bm3d), noisy, 20.0) == bm3d(noisy, 20.0));
    CHECK(run_builtin(builtin("b", BuiltinId::bm3d, {{"sigma", 15}}), noisy, 20.0) == bm3d(noisy, 15.0));
    CHECK_THROWS(run_builtin(builtin("b", BuiltinId::bm3d), noisy, std::nullopt));
}

TEST_CASE("time_denoiser") {
    const Image card = make_timing_image(1);
    CHECK(card.width() == 256);
    CHECK(card.height() == 256);
    CHECK(card == make_timing_image(1));
    CHECK_THROWS(time_denoiser(builtin("identity", BuiltinId::identity), card, 2));

    const auto identity = time_denoiser(builtin("identity", BuiltinId::identity), card, 3);
    const auto median = time_denoiser(builtin("median", BuiltinId::median), card, 3);
    const auto bm3d_time = time_denoiser(builtin("bm3d", BuiltinId::bm3d), card, 3, 50.0);
    for (const auto *t : {&identity, &median, &bm3d_time}) {
        CHECK(t->samples_s.size() == 3);
        CHECK(std::ranges::all_of(t->samples_s, [](double s) { return s >= 0.0; }));
    }
    CHECK(identity.median_s < median.median_s);
    CHECK(median.median_s < bm3d_time.median_s);
}

TEST_CASE("fingerprint_directory sees content and names") {
    TempDir a;
    write_corpus(a.path(), 2);
    const auto before = fingerprint_directory(a.path());
    CHECK(before == fingerprint_directory(a.path()));
    fs::rename(a.path() / "im01.png", a.path() / "im09.png");
    CHECK(before != fingerprint_directory(a.path()));
}

TEST_CASE("manifest round trip") {
    TempDir root;
    const std::string json = R"({
      "master_seed": 2024, "output_dir": "out", "metrics": ["psnr"], "timing": "per_image", "timing_repeats": 5,
      "datasets": [
        {"name": "g50", "kind": "synthetic", "clean_dir": "clean", "noise": {"variant": "gaussian", "sigma": 50}},
        {"name": "mix", "clean_dir": "clean", "noise": {"variant": "mixture", "sigma": 50, "fraction": 0.2, "seed": 3}, "test_count": 2},
        {"name": "em", "kind": "paired", "clean_dir": "/abs/ref", "noisy_dir": "noisy"}
      ],
      "methods": [
        {"name": "identity", "builtin": "identity"},
        {"name": "median", "builtin": "median", "params": {"radius": 2}},
        {"name": "dncnn", "command": ["python3", "dncnn.py", "--weights", "w.pt"], "timeout": 60, "batch": false}
      ]
    })";
    const RunManifest m = parse_manifest(json, root.path());
    CHECK(m.master_seed == 2024);
    CHECK(m.output_dir == root.path() / "out");
    CHECK(m.score_psnr);
    CHECK_FALSE(m.score_ssim);
    CHECK(m.timing == TimingMode::per_image);
    REQUIRE(m.datasets.size() == 3);
    CHECK(m.datasets[0].noise->master_seed == 2024);
    CHECK(m.datasets[1].noise->variant == NoiseVariant::mixture);
    CHECK(m.datasets[1].noise->master_seed == 3);
    CHECK(m.datasets[1].test_count == 2);
    CHECK(m.datasets[2].clean_dir == "/abs/ref");
    CHECK(m.datasets[2].noisy_dir == root.path() / "noisy");
    REQUIRE(m.methods.size() == 3);
    CHECK(m.methods[1].parameters.at("radius") == 2);
    CHECK(m.methods[2].kind == DenoiserKind::external);
    CHECK(m.methods[2].command.size() == 4);
    CHECK(m.methods[2].command[0] == "python3");
    CHECK(m.methods[2].command[1] == "dncnn.py");
    CHECK(m.methods[2].timeout_s == 60);
    CHECK_FALSE(m.methods[2].batch);

    const std::string canonical = serialize_manifest(m);
    const RunManifest again = parse_manifest(canonical, "/elsewhere");
    CHECK(serialize_manifest(again) == canonical);
    CHECK(again.output_dir == m.output_dir);
}

TEST_CASE("relative plugin executables resolve against the manifest") {
    const std::string json = R"({"output_dir": "o",
      "datasets": [{"name": "d", "clean_dir": "c", "noise": {"variant": "sp", "fraction": 0.1}}],
      "methods": [{"name": "a", "command": ["./plugins/run.sh", "x/y"]}, {"name": "b", "command": ["../bin/p"]}]})";
    const RunManifest m = parse_manifest(json, "/srv/bench");
    CHECK(m.methods[0].command == std::vector<std::string>{"/srv/bench/plugins/run.sh", "x/y"});
    CHECK(m.methods[1].command[0] == "/srv/bin/p");
}

TEST_CASE("manifest errors") {
    const auto bad = [](const std::string &json) { CHECK_THROWS_AS(parse_manifest(json, "/tmp"), ManifestError); };
    const std::string ds = R"("datasets": [{"name": "d", "clean_dir": "c", "noise": {"variant": "gaussian", "sigma": 5}}])";
    const std::string me = R"("methods": [{"name": "identity", "builtin": "identity"}])";
    CHECK_NOTHROW(parse_manifest("{" + ds + "," + me + R"(, "output_dir": "o"})", "/tmp"));
    bad("{not json");
    bad("{" + me + R"(, "output_dir": "o", "datasets": []})");
    bad("{" + ds + R"(, "output_dir": "o", "methods": []})");
    bad("{" + ds + R"(, "output_dir": "o", "methods": [{"name": "x", "builtin": "nlm"}]})");
    bad("{" + ds + R"(, "output_dir": "o", "methods": [{"name": "a", "builtin": "identity"}, {"name": "a", "builtin": "median"}]})");
    bad("{" + ds + "," + me + R"(, "output_dir": "o", "timing_repeats": 2})");
    bad("{" + ds + "," + me + R"(, "output_dir": "o", "metrics": ["lpips"]})");
    bad("{" + ds + "," + me + "}");
}

TEST_CASE("dry-run plan") {
    TempDir root;
    write_corpus(root.path() / "clean", 2);
    const RunManifest m = three_builtins(root.path() / "clean", root.path() / "out");
    const std::string plan = describe_plan(m);
    CHECK(plan.find("gaussian:sigma=25") != std::string::npos);
    CHECK(plan.find("2 images") != std::string::npos);
    CHECK(plan.find("bm3d: builtin bm3d") != std::string::npos);
    CHECK_FALSE(fs::exists(m.output_dir));
}
