#pragma once

#include <cstddef>
#include <functional>

namespace npgd {

/// Worker count: NPGD_THREADS when set, else logical CPUs.
unsigned worker_count();

/// Runs fn(chunk_index, begin, end) over a fixed decomposition of [0, total)
/// into chunks of chunk_size. The decomposition is independent of the worker
/// count, so per-chunk results merged in chunk order are reproducible under
/// any thread count.
void parallel_chunks(std::size_t total, std::size_t chunk_size,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

}  // namespace npgd
