#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace chordmink {

/// Thread cap: CHORDMINK_THREADS environment variable, 0 or unset = auto.
inline unsigned thread_cap() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const char* env = std::getenv("CHORDMINK_THREADS");
  if (env == nullptr) return hw;
  long v = std::strtol(env, nullptr, 10);
  if (v <= 0) return hw;
  return std::min<unsigned>(hw, static_cast<unsigned>(v));
}

/// Runs fn(shard_index) for shard_index in [0, shards) on up to thread_cap()
/// threads and returns the per-shard results in shard order. The shard count
/// is fixed by the caller, so results do not depend on how many threads the
/// host grants; reductions over the returned vector stay bit-identical.
template <typename T, typename Fn>
std::vector<T> run_sharded(int shards, Fn&& fn) {
  std::vector<T> out(static_cast<std::size_t>(shards));
  unsigned threads = std::min<unsigned>(thread_cap(), static_cast<unsigned>(shards));
  if (threads <= 1) {
    for (int s = 0; s < shards; ++s) out[static_cast<std::size_t>(s)] = fn(s);
    return out;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::atomic<int> next{0};
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        int s = next.fetch_add(1);
        if (s >= shards) return;
        out[static_cast<std::size_t>(s)] = fn(s);
      }
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace chordmink
