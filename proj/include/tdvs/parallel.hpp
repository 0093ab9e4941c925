#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>

namespace tdvs {

/// Seed for a child random stream, a pure function of the master seed and a
/// path of task coordinates (stage, target, replicate index, ...).
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

/// 0 means: TDVS_THREADS from the environment if set, else hardware concurrency.
std::size_t resolve_threads(std::size_t requested);

/// Runs fn(0) ... fn(count - 1) on up to `threads` workers. Each index runs
/// exactly once; results must be written to index-addressed slots so the
/// outcome does not depend on scheduling. The first exception is rethrown.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace tdvs
