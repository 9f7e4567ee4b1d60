#pragma once

#include <cstddef>
#include <functional>

namespace sf::numeric {

// Worker-thread cap. Read once from SPECTRAL_FORECASTER_THREADS (default 1);
// set_max_threads overrides it for the process.
std::size_t max_threads();
void set_max_threads(std::size_t n);

// Runs fn(begin, end) over disjoint chunks of [0, n). Chunks never share
// outputs, so results do not depend on the thread count. `work_per_item` is a
// rough flop estimate used to stay serial for small jobs.
void parallel_for(std::size_t n, std::size_t work_per_item,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace sf::numeric
