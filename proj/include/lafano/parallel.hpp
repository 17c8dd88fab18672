#pragma once

#include <cstddef>
#include <functional>

namespace lafano {

/// Runs f(i) for i in [0, n) on up to `jobs` threads; results are written by
/// index so the outcome does not depend on the schedule. The first exception
/// is rethrown after all workers finish.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& f);

}  // namespace lafano
