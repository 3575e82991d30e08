#pragma once

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace denoise_bench::detail {

// Library logger: standard error, warnings and up unless configure_logging says otherwise.
inline spdlog::logger &log() {
    static const std::shared_ptr<spdlog::logger> logger = [] {
        auto l = spdlog::stderr_color_mt("denoise-bench");
        l->set_pattern("[%l] %v");
        l->set_level(spdlog::level::warn);
        return l;
    }();
    return *logger;
}

}  // namespace denoise_bench::detail
