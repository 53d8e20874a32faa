#include "colorgs/parallel.hpp"

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace colorgs {

int effective_workers(int requested, int rows) { return std::clamp(requested, 1, std::max(rows, 1)); }

void parallel_rows(int rows, int workers, const std::function<void(int, int, int)>& fn) {
  workers = effective_workers(workers, rows);
  if (workers == 1) {
    fn(0, rows, 0);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  auto run = [&](int w) {
    const int begin = rows * w / workers;
    const int end = rows * (w + 1) / workers;
    try {
      fn(begin, end, w);
    } catch (...) {
      errors[static_cast<std::size_t>(w)] = std::current_exception();
    }
  };
  {
    std::vector<std::jthread> threads;
    threads.reserve(static_cast<std::size_t>(workers - 1));
    for (int w = 1; w < workers; ++w) threads.emplace_back(run, w);
    run(0);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace colorgs
