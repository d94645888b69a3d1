#pragma once

#include <stdexcept>
#include <string>

namespace sceneforge {

enum class ErrorCode {
  precondition,
  parse,
  missing_asset,
  invalid_graph,
  io,
  empty_instance,
  no_candidates,
  unresolved_penetration,
  simulation_diverged,
  undefined_metric,
  undefined_energy,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::precondition, what);
}

}  // namespace sceneforge
