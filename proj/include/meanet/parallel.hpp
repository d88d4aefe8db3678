#pragma once

#include <cstddef>
#include <functional>

namespace meanet {

// Number of worker threads a requested width maps to (0 = hardware concurrency).
unsigned effective_width(unsigned requested);

// Runs fn(i) for i in [0, n). Work items must be independent and must not
// care which thread executes them; all determinism in this codebase comes
// from addressing randomness by item index, never by thread.
void parallel_for(std::size_t n, unsigned width, const std::function<void(std::size_t)>& fn);

} // namespace meanet
