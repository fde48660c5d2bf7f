// Copyright 2026 The splatpack Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace splatpack {

/// Caps the number of worker threads used internally. Results never depend on
/// this value; 0 selects the hardware concurrency.
void set_thread_count(unsigned count);
unsigned thread_count();

/// Runs body(begin, end) over fixed-size chunks of [0, n). Chunk boundaries
/// depend only on n and chunk, so per-chunk reductions are deterministic.
void parallel_for_chunks(size_t n, size_t chunk,
                         const std::function<void(size_t chunk_index, size_t begin, size_t end)>& body);

}  // namespace splatpack
