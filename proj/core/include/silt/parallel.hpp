#pragma once

// Deterministic data-parallel helpers.
//
// Work is cut into fixed-size chunks independent of the thread count; each
// chunk is reduced sequentially and chunk results are combined in index
// order, so results are bitwise identical for any number of threads.

#include <algorithm>
#include <cmath>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace silt {

struct Exec {
  int threads = 1;
};

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Calls fn(chunk_index, begin, end) for every chunk of [0, count) and returns
// the per-chunk results in chunk order.
template <class T, class Fn>
std::vector<T> map_chunks(std::size_t count, std::size_t chunk, const Exec& exec, Fn&& fn) {
  if (chunk == 0) chunk = 1;
  const std::size_t chunks = (count + chunk - 1) / chunk;
  std::vector<T> out(chunks);
  const auto run = [&](std::size_t c) {
    const std::size_t begin = c * chunk;
    out[c] = fn(c, begin, std::min(count, begin + chunk));
  };
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(exec.threads, 1)), chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run(c);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t c = next++; c < chunks; c = next++) {
        try {
          run(c);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = chunks;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace silt
