#include "sceneforge/util/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace sceneforge {

namespace {
std::atomic<int> g_max_jobs{1};
}

void set_max_jobs(int jobs) { g_max_jobs = std::max(1, jobs); }
int max_jobs() { return g_max_jobs; }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(max_jobs()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::jthread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  threads.clear();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace sceneforge
