#pragma once

#include <cstddef>
#include <functional>

namespace wkam {

/// Number of worker threads used by parallel_for (default: hardware).
void set_worker_count(int n);
int worker_count();

/// Fork-join loop over [0, count). Work is split into a fixed number of
/// chunks independent of the thread count, so chunk boundaries (and hence
/// any per-chunk reductions) are reproducible across --threads settings.
/// f(begin, end, chunk_index) must write disjoint outputs per index.
void parallel_for(std::size_t count,
                  const std::function<void(std::size_t, std::size_t, int)>& f);

/// Fixed chunk grid used by parallel_for.
int parallel_chunk_count(std::size_t count);

}  // namespace wkam
