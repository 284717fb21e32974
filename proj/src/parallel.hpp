// Copyright 2026 The patchpose Authors
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

#ifndef PATCHPOSE_PARALLEL_HPP_
#define PATCHPOSE_PARALLEL_HPP_

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace patchpose {

inline std::atomic<int>& worker_count_storage() {
  static std::atomic<int> n{1};
  return n;
}

/// Number of threads used by parallel_for. Results never depend on it.
inline int worker_count() { return worker_count_storage().load(); }
inline void set_worker_count(int n) { worker_count_storage().store(std::max(1, n)); }

inline bool& in_parallel_region() {
  thread_local bool inside = false;
  return inside;
}

/// Calls fn(i) for every i in [0, n). Work is split into contiguous blocks;
/// callers write into per-index slots and reduce in index order afterwards.
/// Nested calls run serially on the calling worker.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), n);
  if (workers <= 1 || in_parallel_region()) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t block = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      in_parallel_region() = true;
      try {
        const std::size_t end = std::min(n, (w + 1) * block);
        for (std::size_t i = w * block; i < end; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace patchpose

#endif  // PATCHPOSE_PARALLEL_HPP_
