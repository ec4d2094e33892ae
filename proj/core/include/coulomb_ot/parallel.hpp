#pragma once

#include <functional>

namespace coulomb_ot {

/// Worker count: hardware concurrency, capped by COULOMB_OT_THREADS.
int thread_count();

/// Runs fn(k) for k in [0, n) on up to thread_count() threads. Work is
/// split into contiguous blocks so results do not depend on scheduling.
/// The first exception thrown by any worker is rethrown.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace coulomb_ot
