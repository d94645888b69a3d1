#pragma once

#include <cstddef>
#include <functional>

namespace sceneforge {

/// Upper bound on worker threads for parallel_for; set from `--jobs`.
void set_max_jobs(int jobs);
int max_jobs();

/// Runs body(i) for i in [0, n). Work is split statically, so any per-index
/// output is independent of scheduling. Exceptions from workers are rethrown
/// (lowest index first).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace sceneforge
