#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <span>
#include <thread>
#include <type_traits>
#include <vector>

#include "pagd/channel.hpp"

namespace pagd {

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
  double std_error = 0.0;
};

inline Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (s.count == 0) return s;
  // Neumaier summation; long replicate runs otherwise drift by n * ulp.
  double sum = 0.0, carry = 0.0;
  for (double v : values) {
    const double t = sum + v;
    carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  s.mean = (sum + carry) / static_cast<double>(s.count);
  if (s.count > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(sq / static_cast<double>(s.count - 1));
    s.std_error = s.stddev / std::sqrt(static_cast<double>(s.count));
  }
  return s;
}

/// Runs fn(index, seed) for index in [0, count) with seed =
/// derive_seed(root_seed, index), spread over worker threads. Results come back
/// in index order, so any reduction over them is deterministic. The first
/// exception by index is rethrown.
template <class Fn>
auto replicate(std::size_t count, std::uint64_t root_seed, Fn&& fn,
               unsigned threads = std::thread::hardware_concurrency())
    -> std::vector<std::invoke_result_t<Fn&, std::size_t, std::uint64_t>> {
  using Result = std::invoke_result_t<Fn&, std::size_t, std::uint64_t>;
  std::vector<Result> results(count);
  std::vector<std::exception_ptr> errors(count);
  const std::size_t workers =
      std::clamp<std::size_t>(threads == 0 ? 1 : threads, 1,
                              std::max<std::size_t>(count, 1));
  auto work = [&](std::size_t first) {
    for (std::size_t i = first; i < count; i += workers) {
      try {
        results[i] = fn(i, derive_seed(root_seed, i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace pagd
