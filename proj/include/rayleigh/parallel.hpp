#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace rayleigh {

// Worker count: explicit request, else RAYLEIGH_THREADS, else hardware.
// RAYLEIGH_MAX_THREADS caps whatever was chosen.
inline unsigned resolve_threads(unsigned requested = 0) {
  unsigned n = requested;
  if (n == 0) {
    if (const char* e = std::getenv("RAYLEIGH_THREADS")) n = static_cast<unsigned>(std::max(1, std::atoi(e)));
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* cap = std::getenv("RAYLEIGH_MAX_THREADS")) {
    int c = std::atoi(cap);
    if (c > 0) n = std::min<unsigned>(n, static_cast<unsigned>(c));
  }
  return n;
}

// out[i] = fn(i) for i in [0, n). Work is dealt round-robin so results do not
// depend on the thread count; the first exception is rethrown on the caller.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, Fn&& fn, unsigned threads = 0) {
  std::vector<T> out(n);
  unsigned nt = std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(n, 1));
  if (nt <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < nt; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += nt) {
          {
            std::lock_guard<std::mutex> lk(mu);
            if (err) return;
          }
          out[i] = fn(i);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lk(mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
  return out;
}

}  // namespace rayleigh
