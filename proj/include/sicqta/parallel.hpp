#pragma once

// Deterministic parallelism helpers. Work items write results keyed by
// their index and reductions are associative, so output never depends on
// the worker count.

#include <cstdint>
#include <cstdlib>
#include <random>
#include <thread>
#include <vector>

#include "sicqta/core.hpp"

namespace sicqta {

/// Worker count: SICQTA_WORKERS env var if set, else hardware concurrency.
inline unsigned default_worker_count() {
  if (const char* env = std::getenv("SICQTA_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1 && v <= 4096) return static_cast<unsigned>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? hc : 1;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Private RNG stream for work item `index` of a run seeded with `seed`.
inline std::mt19937_64 rng_stream(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(index)));
}

/// Run fn(i) for i in [0, n), split into contiguous ranges over workers.
template <typename Fn>
void parallel_for(std::uint64_t n, Fn&& fn, unsigned workers = 0) {
  if (workers == 0) workers = default_worker_count();
  if (n == 0) return;
  if (workers <= 1 || n == 1) {
    for (std::uint64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  if (workers > n) workers = static_cast<unsigned>(n);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  const std::uint64_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t begin = w * chunk;
    const std::uint64_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([begin, end, &fn] {
      for (std::uint64_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& t : threads) t.join();
}

/// Draw M distinct device ids uniformly from [0, 2^u), sorted.
inline IdSet sample_distinct_ids(int m, const TreeParams& params,
                                 std::mt19937_64& rng) {
  const std::uint64_t n = params.device_count();
  if (m < 0 || static_cast<std::uint64_t>(m) > n)
    throw std::invalid_argument("cannot draw more distinct ids than 2^u");
  IdSet out;
  out.reserve(static_cast<std::size_t>(m));
  if (n <= (1u << 20) && static_cast<std::uint64_t>(m) * 4 >= n) {
    // Dense draw: partial Fisher-Yates over the full population.
    std::vector<DeviceId> pool(static_cast<std::size_t>(n));
    for (std::uint64_t i = 0; i < n; ++i) pool[i] = static_cast<DeviceId>(i);
    for (int i = 0; i < m; ++i) {
      std::uniform_int_distribution<std::uint64_t> dist(i, n - 1);
      std::swap(pool[static_cast<std::size_t>(i)],
                pool[static_cast<std::size_t>(dist(rng))]);
      out.push_back(pool[static_cast<std::size_t>(i)]);
    }
  } else {
    // Sparse draw: rejection sampling.
    std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
    while (static_cast<int>(out.size()) < m) {
      const DeviceId candidate = static_cast<DeviceId>(dist(rng));
      if (!detail::contains_sorted(out, candidate))
        detail::insert_sorted(out, candidate);
    }
    return out;
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace sicqta
