// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace sgm {

/// Runs fn(i) for i in [0, count) on `workers` threads.
///
/// Work is handed out through a shared atomic cursor, so scheduling varies
/// between runs; callers keep output deterministic by writing result i into
/// slot i. The first exception thrown (lowest index) is rethrown after every
/// worker has joined.
template <class Fn>
void parallel_for_index(std::size_t count, std::size_t workers, Fn&& fn) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> cursor{0};
  const auto drain = [&] {
    for (std::size_t i = cursor.fetch_add(1); i < count; i = cursor.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    drain();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(drain);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace sgm
