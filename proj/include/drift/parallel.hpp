#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace drift {

/// Trials are grouped in fixed-size chunks. Chunk boundaries never depend on
/// the worker count, so per-chunk reductions merged in chunk order give the
/// same bits for any number of workers.
inline constexpr std::size_t kTrialChunk = 64;

inline std::size_t chunk_count(std::size_t trials) {
  return (trials + kTrialChunk - 1) / kTrialChunk;
}

/// Calls fn(chunk, first_trial, last_trial) for every chunk, spread over
/// `workers` threads. The first exception thrown by any chunk is rethrown.
template <class Fn>
void for_each_chunk(std::size_t trials, unsigned workers, Fn&& fn) {
  const std::size_t chunks = chunk_count(trials);
  auto run_chunk = [&](std::size_t c) {
    const std::size_t lo = c * kTrialChunk;
    fn(c, lo, std::min(trials, lo + kTrialChunk));
  };
  if (workers <= 1 || chunks <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  const auto n = static_cast<std::size_t>(workers) < chunks ? workers : chunks;
  pool.reserve(n);
  for (std::size_t w = 0; w < n; ++w) {
    pool.emplace_back([&] {
      for (std::size_t c = next++; c < chunks; c = next++) {
        try {
          run_chunk(c);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = chunks;
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace drift
