#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

#include "qfals/linalg.hpp"
#include "qfals/rng.hpp"

namespace qfals {

/// Mean of n matrices produced by `sample(Rng&)`.
///
/// Worker w draws from base.split(w) and handles a contiguous share of the
/// n samples; partial sums are added in worker order, so the result is
/// bit-identical for a fixed (base seed, threads) pair.
template <class SampleFn>
ComplexMatrix parallel_mean(std::size_t n, std::size_t threads, const Rng& base,
                            Eigen::Index rows, Eigen::Index cols,
                            SampleFn&& sample) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, n));
  std::vector<ComplexMatrix> partial(workers, ComplexMatrix::Zero(rows, cols));
  auto run = [&](std::size_t w) {
    Rng rng = base.split(w);
    const std::size_t count = n / workers + (w < n % workers ? 1 : 0);
    for (std::size_t i = 0; i < count; ++i) partial[w] += sample(rng);
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  ComplexMatrix total = ComplexMatrix::Zero(rows, cols);
  for (const auto& p : partial) total += p;
  return n == 0 ? total : ComplexMatrix(total / static_cast<double>(n));
}

}  // namespace qfals
