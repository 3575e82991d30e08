#include "denoise_bench/plugin.hpp"

#include "denoise_bench/dataset.hpp"
#include "denoise_bench/noise.hpp"
#include "denoise_bench/tempdir.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

extern char **environ;

namespace denoise_bench {

namespace fs = std::filesystem;

// ---- descriptor ------------------------------------------------------------

std::string_view to_string(BuiltinId id) {
    switch (id) {
        case BuiltinId::identity: return "identity";
        case BuiltinId::median: return "median";
        case BuiltinId::bm3d: return "bm3d";
    }
    return "?";
}

std::optional<BuiltinId> parse_builtin_id(std::string_view name) {
    for (auto id : {BuiltinId::identity, BuiltinId::median, BuiltinId::bm3d}) {
        if (to_string(id) == name) return id;
    }
    return std::nullopt;
}

void DenoiserDescriptor::validate() const {
    if (name.empty()) throw std::invalid_argument("denoiser without a name");
    if (!(timeout_s > 0.0)) throw std::invalid_argument(fmt::format("denoiser '{}': timeout must be > 0", name));
    if (kind == DenoiserKind::external && command.empty()) {
        throw std::invalid_argument(fmt::format("denoiser '{}': external method without a command", name));
    }
}

// ---- temp dirs ---------------------------------------------------------------

TempDir::TempDir(const std::string &prefix) {
    std::string pattern = (fs::temp_directory_path() / (prefix + "-XXXXXX")).string();
    if (!mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed: " + std::string(std::strerror(errno)));
    path_ = pattern;
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

// ---- errors -----------------------------------------------------------------

std::string_view to_string(PluginFailure f) {
    switch (f) {
        case PluginFailure::spawn_failure: return "spawn failure";
        case PluginFailure::nonzero_exit: return "nonzero exit";
        case PluginFailure::timeout: return "timeout";
        case PluginFailure::name_contract: return "name contract";
        case PluginFailure::missing_output: return "missing output";
        case PluginFailure::undecodable_output: return "undecodable output";
        case PluginFailure::dimension_mismatch: return "dimension mismatch";
    }
    return "?";
}

PluginError::PluginError(PluginFailure failure, std::vector<std::string> image_ids, const std::string &detail,
                         std::string stderr_text)
    : std::runtime_error(fmt::format("{}: {} [{}]", to_string(failure), detail, fmt::join(image_ids, ", "))),
      failure_(failure),
      image_ids_(std::move(image_ids)),
      stderr_text_(std::move(stderr_text)) {}

// ---- process ----------------------------------------------------------------

namespace {

std::string slurp(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> child_environment() {
    const std::string prefix = std::string(protocol_env_var) + "=";
    std::vector<std::string> env;
    for (char **e = environ; e && *e; ++e) {
        if (std::string_view(*e).starts_with(prefix)) continue;
        env.emplace_back(*e);
    }
    env.push_back(prefix + std::string(protocol_version));
    return env;
}

std::vector<char *> c_strings(std::vector<std::string> &strings) {
    std::vector<char *> out;
    for (auto &s : strings) out.push_back(s.data());
    out.push_back(nullptr);
    return out;
}

}  // namespace

Invocation invoke_process(const std::vector<std::string> &argv_in, double timeout_s) {
    if (argv_in.empty()) throw std::invalid_argument("invoke_process: empty command");
    Invocation result;
    TempDir scratch("denoise-bench-proc");
    const fs::path err_path = scratch.path() / "stderr";

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null", O_RDONLY, 0);
    posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, "/dev/null", O_WRONLY, 0);
    posix_spawn_file_actions_addopen(&actions, STDERR_FILENO, err_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
    posix_spawnattr_t attr;
    posix_spawnattr_init(&attr);
    posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
    posix_spawnattr_setpgroup(&attr, 0);

    std::vector<std::string> args = argv_in;
    std::vector<std::string> env = child_environment();
    auto c_args = c_strings(args);
    auto c_env = c_strings(env);

    pid_t pid = -1;
    const auto start = std::chrono::steady_clock::now();
    const int rc = posix_spawnp(&pid, c_args[0], &actions, &attr, c_args.data(), c_env.data());
    posix_spawn_file_actions_destroy(&actions);
    posix_spawnattr_destroy(&attr);
    if (rc != 0) {
        result.spawn_failed = true;
        result.stderr_text = fmt::format("cannot launch '{}': {}", argv_in[0], std::strerror(rc));
        return result;
    }

    const auto deadline = start + std::chrono::duration<double>(timeout_s);
    int status = 0;
    while (true) {
        const pid_t done = waitpid(pid, &status, WNOHANG);
        if (done == pid) break;
        if (done < 0 && errno != EINTR) break;
        if (std::chrono::steady_clock::now() >= deadline) {
            kill(-pid, SIGKILL);
            waitpid(pid, &status, 0);
            result.timed_out = true;
            break;
        }
        std::this_thread::sleep_for(std::chrono::microseconds(500));
    }
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (!result.timed_out) {
        if (WIFEXITED(status)) {
            result.exit_code = WEXITSTATUS(status);
        } else if (WIFSIGNALED(status)) {
            result.exit_code = 128 + WTERMSIG(status);
        }
    }
    result.stderr_text = slurp(err_path);
    return result;
}

// ---- output validation ----------------------------------------------------

namespace {

std::vector<std::string> image_file_names(const fs::path &dir) {
    std::vector<std::string> names;
    for (const auto &p : list_images(dir)) names.push_back(p.filename().string());
    std::ranges::sort(names);
    return names;
}

std::set<std::string> all_file_names(const fs::path &dir) {
    std::set<std::string> names;
    for (const auto &entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file()) names.insert(entry.path().filename().string());
    }
    return names;
}

void clear_directory(const fs::path &dir) {
    std::error_code ec;
    for (const auto &entry : fs::directory_iterator(dir, ec)) fs::remove_all(entry.path(), ec);
}

void throw_on_invocation_failure(const Invocation &inv, const std::vector<std::string> &ids, double timeout_s) {
    if (inv.spawn_failed) throw PluginError(PluginFailure::spawn_failure, ids, inv.stderr_text, inv.stderr_text);
    if (inv.timed_out) {
        throw PluginError(PluginFailure::timeout, ids, fmt::format("no exit after {} s", timeout_s), inv.stderr_text);
    }
    if (inv.exit_code != 0) {
        throw PluginError(PluginFailure::nonzero_exit, ids, fmt::format("exit code {}", inv.exit_code),
                          inv.stderr_text);
    }
}

void throw_on_output_issue(const fs::path &in, const fs::path &out, const std::string &stderr_text) {
    auto issues = inspect_outputs(in, out);
    if (!issues.empty()) {
        throw PluginError(issues.front().failure, issues.front().files, "output contract violated", stderr_text);
    }
}

std::vector<std::string> protocol_argv(const DenoiserDescriptor &d, const fs::path &in, const fs::path &out) {
    std::vector<std::string> argv = d.command;
    argv.insert(argv.end(), {"--input", in.string(), "--output", out.string()});
    return argv;
}

}  // namespace

std::vector<OutputIssue> inspect_outputs(const fs::path &input_dir, const fs::path &output_dir) {
    const auto inputs = image_file_names(input_dir);
    const std::set<std::string> expected(inputs.begin(), inputs.end());
    const auto produced = all_file_names(output_dir);

    std::vector<OutputIssue> issues;
    OutputIssue unexpected{PluginFailure::name_contract, {}};
    std::ranges::set_difference(produced, expected, std::back_inserter(unexpected.files));
    OutputIssue missing{PluginFailure::missing_output, {}};
    std::ranges::set_difference(expected, produced, std::back_inserter(missing.files));
    OutputIssue undecodable{PluginFailure::undecodable_output, {}};
    OutputIssue mismatched{PluginFailure::dimension_mismatch, {}};

    for (const auto &name : inputs) {
        if (!produced.contains(name)) continue;
        try {
            const Image out = load_image(output_dir / name);
            const Image in = load_image(input_dir / name);
            if (!out.same_shape(in)) mismatched.files.push_back(name);
        } catch (const ImageError &) {
            undecodable.files.push_back(name);
        }
    }
    for (auto *issue : {&unexpected, &missing, &undecodable, &mismatched}) {
        if (!issue->files.empty()) issues.push_back(std::move(*issue));
    }
    return issues;
}

ExternalRun run_external(const DenoiserDescriptor &descriptor, const fs::path &input_dir, const fs::path &output_dir) {
    descriptor.validate();
    if (descriptor.kind != DenoiserKind::external) throw std::invalid_argument("run_external: not an external method");
    fs::create_directories(output_dir);
    if (!fs::is_empty(output_dir)) throw std::invalid_argument("run_external: output directory not empty: " + output_dir.string());

    ExternalRun run;
    run.file_names = image_file_names(input_dir);
    const fs::path in = fs::absolute(input_dir);
    const fs::path out = fs::absolute(output_dir);

    try {
        if (descriptor.batch) {
            const Invocation inv = invoke_process(protocol_argv(descriptor, in, out), descriptor.timeout_s);
            run.stderr_text = inv.stderr_text;
            throw_on_invocation_failure(inv, run.file_names, descriptor.timeout_s);
            throw_on_output_issue(in, out, run.stderr_text);
            const double each = run.file_names.empty() ? 0.0 : inv.seconds / double(run.file_names.size());
            run.seconds.assign(run.file_names.size(), each);
        } else {
            TempDir stage("denoise-bench-stage");
            for (std::size_t i = 0; i < run.file_names.size(); ++i) {
                const std::string &name = run.file_names[i];
                const fs::path one_in = stage.path() / fmt::format("in{}", i);
                const fs::path one_out = stage.path() / fmt::format("out{}", i);
                fs::create_directories(one_in);
                fs::create_directories(one_out);
                fs::copy_file(in / name, one_in / name);
                const Invocation inv = invoke_process(protocol_argv(descriptor, one_in, one_out), descriptor.timeout_s);
                run.stderr_text += inv.stderr_text;
                throw_on_invocation_failure(inv, {name}, descriptor.timeout_s);
                throw_on_output_issue(one_in, one_out, run.stderr_text);
                fs::rename(one_out / name, out / name);
                run.seconds.push_back(inv.seconds);
            }
        }
    } catch (...) {
        clear_directory(out);
        throw;
    }
    return run;
}

// ---- validation -------------------------------------------------------------

bool PluginReport::passed() const {
    return std::ranges::none_of(checks, [](const PluginCheck &c) { return c.status == PluginCheck::Status::failed; });
}

bool PluginReport::failed_with(PluginFailure f) const {
    return std::ranges::any_of(checks, [&](const PluginCheck &c) {
        return c.status == PluginCheck::Status::failed && c.failure == f;
    });
}

std::string PluginReport::render() const {
    std::string out;
    for (const auto &c : checks) {
        const char *status = c.status == PluginCheck::Status::passed   ? "PASS"
                             : c.status == PluginCheck::Status::failed ? "FAIL"
                                                                       : "SKIP";
        out += fmt::format("[{}] {}", status, c.name);
        if (c.failure) out += fmt::format(" ({})", to_string(*c.failure));
        if (!c.detail.empty()) out += ": " + c.detail;
        out += '\n';
    }
    return out;
}

std::vector<std::pair<std::string, Image>> smoke_images() {
    constexpr std::size_t side = 32;
    Image constant(side, side, 128.0);
    Image gradient(side, side);
    for (std::size_t r = 0; r < side; ++r) {
        for (std::size_t c = 0; c < side; ++c) gradient(r, c) = double((r + c) * 255 / (2 * side - 2));
    }
    Image random = awgn(Image(side, side, 128.0), 60.0, 0x5eed);
    return {{"constant.png", constant}, {"gradient.png", gradient}, {"random.png", random}};
}

PluginReport validate_plugin(const DenoiserDescriptor &descriptor) {
    descriptor.validate();
    if (descriptor.kind != DenoiserKind::external) throw std::invalid_argument("validate_plugin: not an external method");

    TempDir work("denoise-bench-validate");
    const fs::path in = work.path() / "input";
    const fs::path out = work.path() / "output";
    fs::create_directories(in);
    fs::create_directories(out);
    std::vector<std::string> names;
    for (const auto &[name, img] : smoke_images()) {
        save_image(img, in / name);
        names.push_back(name);
    }

    PluginReport report;
    const Invocation inv = invoke_process(protocol_argv(descriptor, in, out), descriptor.timeout_s);
    report.stderr_text = inv.stderr_text;

    PluginCheck invocation;
    invocation.name = "invocation";
    if (inv.spawn_failed) {
        invocation = {"invocation", PluginCheck::Status::failed, PluginFailure::spawn_failure, inv.stderr_text};
    } else if (inv.timed_out) {
        invocation = {"invocation", PluginCheck::Status::failed, PluginFailure::timeout,
                      fmt::format("killed after {} s", descriptor.timeout_s)};
    } else if (inv.exit_code != 0) {
        invocation = {"invocation", PluginCheck::Status::failed, PluginFailure::nonzero_exit,
                      fmt::format("exit code {}", inv.exit_code)};
    }
    report.checks.push_back(invocation);

    const std::vector<std::pair<std::string, PluginFailure>> output_checks = {
        {"name contract", PluginFailure::name_contract},
        {"complete outputs", PluginFailure::missing_output},
        {"decodable outputs", PluginFailure::undecodable_output},
        {"dimensions", PluginFailure::dimension_mismatch},
    };
    if (invocation.status == PluginCheck::Status::failed) {
        for (const auto &[name, failure] : output_checks) {
            report.checks.push_back({name, PluginCheck::Status::skipped, std::nullopt, "invocation failed"});
        }
        return report;
    }

    const auto issues = inspect_outputs(in, out);
    for (const auto &[name, failure] : output_checks) {
        PluginCheck check;
        check.name = name;
        for (const auto &issue : issues) {
            if (issue.failure == failure) {
                check = {name, PluginCheck::Status::failed, failure, fmt::format("{}", fmt::join(issue.files, ", "))};
            }
        }
        report.checks.push_back(check);
    }
    return report;
}

}  // namespace denoise_bench
