// Copyright (c) 2026 The sesmarket Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace sesm {

class InvalidInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// splitmix64: tiny, stateless, well-mixed. Used both as a stream generator
// and as the hash behind derived per-purpose seeds, so every agent's draws
// are independent of thread scheduling.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t hash_combine(uint64_t seed, uint64_t v) {
  uint64_t s = seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
  return splitmix64(s);
}

inline uint64_t hash_combine(uint64_t seed, const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
  return hash_combine(seed, h);
}

// Deterministic stream with value-semantics; cheap to fork per purpose.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() { return splitmix64(state_); }

  // uniform in [0,1)
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  uint64_t uniform_u64(uint64_t n) {  // [0, n)
    if (n == 0) throw InvalidInput("uniform_u64: n must be positive");
    return next_u64() % n;
  }

  double normal() {  // Box-Muller, one value per call
    double u1 = 0;
    while (u1 == 0) u1 = next_double();
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  std::vector<unsigned char> bytes(size_t n) {
    std::vector<unsigned char> out(n);
    size_t i = 0;
    while (i < n) {
      uint64_t w = next_u64();
      for (int k = 0; k < 8 && i < n; ++k, ++i) out[i] = (unsigned char)(w >> (8 * k));
    }
    return out;
  }

 private:
  uint64_t state_;
};

// Runs fn(i) for i in [0,n). Outputs must land in per-index slots; the
// caller does any reduction sequentially after the join.
inline void parallel_for(int n, const std::function<void(int)>& fn,
                         unsigned max_threads = 0) {
  unsigned hw = max_threads ? max_threads : std::thread::hardware_concurrency();
  if (hw <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  unsigned workers = std::min<unsigned>(hw, (unsigned)n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr err;
  std::mutex err_mu;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = (int)w; i < n; i += (int)workers) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace sesm
