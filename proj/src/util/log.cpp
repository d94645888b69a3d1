#include "sceneforge/util/log.hpp"

#include <cstdlib>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>

namespace sceneforge {

void init_logging() {
  auto logger = spdlog::stderr_color_mt("sceneforge");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("SCENEFORGE_LOG")) {
    std::string level(env);
    if (level == "error") spdlog::set_level(spdlog::level::err);
    else if (level == "warn") spdlog::set_level(spdlog::level::warn);
    else if (level == "info") spdlog::set_level(spdlog::level::info);
    else if (level == "debug") spdlog::set_level(spdlog::level::debug);
  }
}

}  // namespace sceneforge
