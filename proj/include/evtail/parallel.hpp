#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace evtail {

// Static block partition of [0, n) across worker threads.  The body must
// write only to its own index's slot; results are then deterministic no
// matter how many threads run.  n_threads == 0 picks the hardware count.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                         unsigned n_threads = 0) {
  if (n == 0) return;
  unsigned hw = n_threads ? n_threads : std::thread::hardware_concurrency();
  if (hw <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  if (hw > n) hw = static_cast<unsigned>(n);

  std::vector<std::exception_ptr> errors(hw);
  std::vector<std::thread> workers;
  workers.reserve(hw);
  const std::size_t chunk = (n + hw - 1) / hw;
  for (unsigned t = 0; t < hw; ++t) {
    const std::size_t lo = static_cast<std::size_t>(t) * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    workers.emplace_back([&, lo, hi, t] {
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace evtail
