#include "ddgroup/parallel.hpp"

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace ddgroup {

void parallel_for(long count, int jobs, const std::function<void(long)>& fn) {
  if (count <= 0) return;
  const int threads = static_cast<int>(std::min<long>(std::max(jobs, 1), count));
  if (threads == 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  const long chunk = (count + threads - 1) / threads;
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    const long begin = static_cast<long>(t) * chunk;
    const long end = std::min(count, begin + chunk);
    pool.emplace_back([&, t, begin, end] {
      try {
        for (long i = begin; i < end; ++i) fn(i);
      } catch (...) {
        errors[static_cast<size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

}  // namespace ddgroup
