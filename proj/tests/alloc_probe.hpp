#pragma once

#include <cstddef>

namespace alloc_probe {

// Begins recording the largest single heap request.
void start();
// Stops recording and returns the largest request seen, in bytes.
std::size_t stop();

}  // namespace alloc_probe
