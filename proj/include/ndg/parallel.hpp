#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace ndg {

/// Worker cap: NONDIV_DG_THREADS if set and positive, else hardware concurrency.
inline int worker_count() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("NONDIV_DG_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap >= 1) return std::min(cap, hw);
    } catch (const std::exception&) {
    }
  }
  return hw;
}

/// Split [0, n) into contiguous chunks, run `fn(begin, end, out)` on each with
/// its own output slot, and return the slots in chunk order. The first
/// exception thrown by any worker is rethrown.
template <class Out, class Fn>
std::vector<Out> parallel_chunks(std::size_t n, Fn&& fn) {
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(worker_count()), n));
  std::vector<Out> out(workers);
  std::vector<std::exception_ptr> errors(workers);
  auto run = [&](std::size_t w) {
    const std::size_t begin = n * w / workers;
    const std::size_t end = n * (w + 1) / workers;
    try {
      fn(begin, end, out[w]);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run, w);
    run(0);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace ndg
