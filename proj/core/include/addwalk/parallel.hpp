// Deterministic task parallelism.
//
// Work is split into indexed tasks; each task writes only to its own
// preallocated slot, and every random draw comes from a stream keyed by the
// task index. Results are therefore byte-identical for any worker count,
// including jobs = 1. Floating-point reductions use a fixed binary tree so
// the summation order never depends on scheduling either.
#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace addwalk {

// Runs body(i) for i in [0, count) on up to `jobs` threads.
void parallel_for(std::size_t count, unsigned jobs,
                  const std::function<void(std::size_t)>& body);

unsigned default_jobs();

// Sums values[first, first+count) by a fixed balanced binary tree,
// independent of how the values were produced.
double pairwise_sum(const double* values, std::size_t count);

inline double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(v.data(), v.size());
}

}  // namespace addwalk
