#include "cuspdet/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <string>

#include "cuspdet/errors.hpp"

namespace cuspdet {

std::shared_ptr<spdlog::logger> logger() {
  static const std::shared_ptr<spdlog::logger> log = [] {
    auto l = spdlog::stderr_color_mt("cuspdet");
    const char* env = std::getenv("CUSPDET_LOG");
    l->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
    return l;
  }();
  return log;
}

void set_log_level(std::string_view level) {
  const auto l = spdlog::level::from_str(std::string(level));
  // from_str maps unknown names to off; only "off" itself may mean off.
  if (l == spdlog::level::off && level != "off") throw DomainError("unknown log level '" + std::string(level) + "'");
  logger()->set_level(l);
}

}  // namespace cuspdet
