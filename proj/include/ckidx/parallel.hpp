#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ckidx {

/// Runs fn(worker) for worker = 0..p-1 on p threads (the caller is worker 0)
/// and joins them. Returning is the phase barrier. The first exception thrown
/// by any worker is rethrown here.
template <class Fn>
void run_workers(std::size_t p, Fn&& fn) {
  if (p <= 1) {
    fn(std::size_t{0});
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  auto guarded = [&](std::size_t w) {
    try {
      fn(w);
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };
  {
    std::vector<std::jthread> threads;
    threads.reserve(p - 1);
    for (std::size_t w = 1; w < p; ++w) threads.emplace_back(guarded, w);
    guarded(0);
  }
  if (error) std::rethrow_exception(error);
}

/// Last-level cache size in bytes, or 0 when it cannot be detected.
std::size_t detect_l3_bytes();

/// Per-thread cache budget: CKIDX_CACHE_BYTES if set, else L3 / p, else
/// 2 MiB.
std::size_t default_cache_bytes(std::size_t p);

}  // namespace ckidx
