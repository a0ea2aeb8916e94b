// Copyright (c) 2026 The Engage Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace engage {

inline std::atomic<unsigned>& worker_count_setting() {
  static std::atomic<unsigned> count{0};
  return count;
}

// 0 means "hardware concurrency".
inline void set_worker_count(unsigned n) { worker_count_setting() = n; }

inline unsigned worker_count() {
  const unsigned n = worker_count_setting().load();
  if (n != 0) return n;
  return std::max(1u, std::thread::hardware_concurrency());
}

inline bool& in_parallel_region() {
  thread_local bool inside = false;
  return inside;
}

// Runs body(i) for i in [0, n). Work items must write to disjoint outputs;
// the result is then independent of the thread schedule. The first
// exception thrown by any item is rethrown on the calling thread. Nested
// calls run serially on the calling worker.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  const std::size_t threads = in_parallel_region() ? 1 : std::min<std::size_t>(worker_count(), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    const bool outer = in_parallel_region();
    in_parallel_region() = true;
    struct Restore {
      bool v;
      ~Restore() { in_parallel_region() = v; }
    } restore{outer};
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace engage
