#pragma once

#include <cstddef>
#include <functional>

namespace mca {

// Resolved worker count: explicit request > MCA_THREADS > hardware.
int resolve_threads(int requested);

// Runs fn(i) for i in [0, n) on up to `threads` workers with a static
// block partition. Every i writes only its own slots, so results do not
// depend on the worker count. Exceptions from workers are rethrown.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)> &fn);

} // namespace mca
