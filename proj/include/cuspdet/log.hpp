#pragma once

#include <memory>
#include <string_view>

namespace spdlog {
class logger;
}

namespace cuspdet {

/// Library logger (stderr). Level from CUSPDET_LOG: trace, debug, info, warn (default), error, off.
std::shared_ptr<spdlog::logger> logger();

/// Overrides CUSPDET_LOG. Throws DomainError on an unknown level name.
void set_log_level(std::string_view level);

}  // namespace cuspdet
