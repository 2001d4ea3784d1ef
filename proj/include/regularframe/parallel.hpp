#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>

namespace regularframe {

/// Worker count for parallel loops. Defaults to REGULARFRAME_THREADS, else 1.
int thread_count();
void set_thread_count(int n);

/// Runs body(i) for i in [0, n). Each index is handled by exactly one
/// worker, so results written by index are independent of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Fixed-shape pairwise summation; the result depends only on the input order.
double pairwise_sum(std::span<const double> v);
std::complex<double> pairwise_sum(std::span<const std::complex<double>> v);

}  // namespace regularframe
