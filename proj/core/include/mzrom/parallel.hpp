#pragma once

#include <cstddef>
#include <functional>

namespace mzrom {

/// Number of workers to use when the caller passes 0.
std::size_t default_workers() noexcept;

/// Runs fn(i) for i in [0, count) on up to `workers` threads. Work items are
/// claimed dynamically, so fn must only write to per-index storage. The first
/// exception thrown by any item is rethrown after all workers join.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace mzrom
