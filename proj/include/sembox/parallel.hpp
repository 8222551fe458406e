#ifndef SEMBOX_PARALLEL_HPP
#define SEMBOX_PARALLEL_HPP

#include <cstdint>
#include <functional>

namespace sembox {

/// Process-wide worker count for element-parallel loops (default: hardware).
void set_worker_count(int n);
int worker_count();

/// Runs fn(i) for i in [0, n). Work is split into fixed-size chunks handed to
/// a persistent pool, so any reduction the caller performs per index must not
/// depend on execution order. fn must not throw.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

/// Chunked variant: fn(begin, end) over disjoint ranges covering [0, n).
void parallel_for_ranges(std::int64_t n,
                         const std::function<void(std::int64_t, std::int64_t)>& fn);

} // namespace sembox

#endif
