// Copyright 2026 mslab developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace mslab {

// Worker count: MSLAB_THREADS if set and positive, otherwise the hardware
// concurrency (at least 1).
unsigned worker_count();

// Runs body(i) for i in [0, n). Each index is handled exactly once; callers
// write results into slot i and reduce afterwards in index order, which keeps
// every reduction independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace mslab
