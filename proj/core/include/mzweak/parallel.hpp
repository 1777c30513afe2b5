#pragma once

#include <cstddef>
#include <functional>

namespace mzweak {

/// Calls body(i) for i in [0, n), spread over the available hardware threads.
/// Each index is visited exactly once; callers write into pre-sized slots so
/// results do not depend on scheduling. The first exception thrown by any
/// body is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Worker count used by parallel_for (at least 1). Overridable through the
/// MZWEAK_THREADS environment variable.
std::size_t worker_count();

}  // namespace mzweak
