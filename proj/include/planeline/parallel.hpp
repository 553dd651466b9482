#pragma once

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace planeline {

/// Process-wide worker cap. 1 (the default) runs everything on the caller.
void set_thread_count(int count);
int thread_count();

/// Runs fn(i) for i in [begin, end). Work items must write disjoint outputs;
/// any reduction over them is done by the caller in index order, which keeps
/// results independent of the worker count.
template <typename Fn>
void parallel_for(int begin, int end, Fn&& fn) {
  const int workers = std::min(thread_count(), end - begin);
  if (workers <= 1) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }
  std::atomic<int> next{begin};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < end; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace planeline
