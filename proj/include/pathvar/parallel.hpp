#pragma once

#include <cstddef>
#include <functional>

namespace pathvar {

// Runs fn(i) for i in [0, count). Work items must write results by index;
// reductions happen afterwards in index order, so any thread count produces
// bit-identical output.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace pathvar
