// Copyright (c) 2026 The bmk Authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <cstddef>
#include <functional>

namespace bmk {

/// Worker count: `threads` if nonzero, else the BMK_THREADS environment
/// variable, else hardware concurrency.
unsigned resolve_thread_count(unsigned threads);

/// Runs fn(i) for i in [0, count) across workers. Each index must write only
/// its own outputs, so results are identical for any worker count.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace bmk
