#pragma once

#include <cstddef>
#include <functional>

namespace copulacd {

/// Worker threads to use: hardware concurrency, capped by the
/// COPULA_CD_THREADS environment variable when set to a positive integer.
std::size_t worker_count();

/// Runs fn(i) for i in [0, n), possibly concurrently. Callers that reduce
/// results must do so in index order afterwards to stay deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace copulacd
