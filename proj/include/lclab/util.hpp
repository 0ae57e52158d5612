#pragma once

#include "lclab/types.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace lclab {

/// Shortest round-trip decimal representation.
std::string fmt_num(double v);
/// "[a,b,c]"; a single coordinate prints without brackets when `bare_scalar`.
std::string fmt_point(const Point& p, bool bare_scalar = false);

std::uint64_t fnv1a64(std::string_view s);
std::uint64_t splitmix64(std::uint64_t x);
/// Seed for an independent stream derived from a master seed and an index.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Largest and smallest eigenvalues of a small symmetric matrix.
double sym_max_eigenvalue(const Mat& m);
double sym_min_eigenvalue(const Mat& m);

/// Worker threads: LCLAB_WORKERS when set to a positive integer, otherwise the
/// hardware concurrency.
int worker_count();

/// Runs body(i, worker) for i in [0, n) on `workers` threads (0: worker_count()).
/// Items are claimed dynamically; callers write results by index so the
/// outcome does not depend on the schedule.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t, int)>& body);

}  // namespace lclab
