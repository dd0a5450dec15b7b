#pragma once

#include <cstddef>
#include <functional>

namespace hgn {

// Worker-thread cap from HGN_THREADS (default 1). Read once per process.
int thread_count();

// Splits [0, n) into at most `threads` contiguous blocks and runs
// fn(begin, end, block_index) on each. Blocks are assigned in index order,
// so any per-block accumulation merged in block order is reproducible for a
// fixed thread count.
void parallel_blocks(std::size_t n, int threads,
                     const std::function<void(std::size_t, std::size_t, int)>& fn);

}  // namespace hgn
