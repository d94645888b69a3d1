#include "sceneforge/util/error.hpp"

namespace sceneforge {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::precondition: return "precondition";
    case ErrorCode::parse: return "parse";
    case ErrorCode::missing_asset: return "missing-asset";
    case ErrorCode::invalid_graph: return "invalid-graph";
    case ErrorCode::io: return "io";
    case ErrorCode::empty_instance: return "empty-instance";
    case ErrorCode::no_candidates: return "no-candidates";
    case ErrorCode::unresolved_penetration: return "unresolved-penetration";
    case ErrorCode::simulation_diverged: return "simulation-diverged";
    case ErrorCode::undefined_metric: return "undefined-metric";
    case ErrorCode::undefined_energy: return "undefined-energy";
  }
  return "unknown";
}

}  // namespace sceneforge
