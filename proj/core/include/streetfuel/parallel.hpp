#pragma once

#include <cstddef>
#include <functional>

namespace streetfuel {

/// Chunked parallel loop over [0, n). The body must only touch state owned by
/// index i, which keeps results independent of the worker count. Exceptions
/// propagate to the caller.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace streetfuel
