#pragma once

#include <cstddef>
#include <functional>

namespace fpt {

// 0 means "all hardware threads".
void set_thread_count(unsigned threads);
unsigned thread_count();

// Calls body(i) for i in [0, n) over static contiguous chunks. Exceptions from
// any worker are rethrown on the calling thread (the first one wins).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace fpt
