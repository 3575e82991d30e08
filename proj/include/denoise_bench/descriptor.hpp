#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace denoise_bench {

enum class DenoiserKind { builtin, external };
enum class BuiltinId { identity, median, bm3d };

std::string_view to_string(BuiltinId id);
std::optional<BuiltinId> parse_builtin_id(std::string_view name);

/// A runnable method. Built-ins take numeric `parameters` (median: radius;
/// bm3d: sigma). External methods run `command` (executable followed by fixed
/// arguments) with `--input DIR --output DIR` appended.
struct DenoiserDescriptor {
    std::string name;
    DenoiserKind kind = DenoiserKind::builtin;
    BuiltinId builtin_id = BuiltinId::identity;
    std::map<std::string, double> parameters;
    std::vector<std::string> command;
    double timeout_s = 600.0;
    bool batch = true;

    void validate() const;
};

}  // namespace denoise_bench
