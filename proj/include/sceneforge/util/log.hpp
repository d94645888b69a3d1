#pragma once

#include <spdlog/spdlog.h>

namespace sceneforge {

/// Reads SCENEFORGE_LOG (error|warn|info|debug) and applies it to the
/// default logger. Unknown values keep the default (warn).
void init_logging();

}  // namespace sceneforge
