#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace nodal {

/// Number of workers used by parallel loops: the override if set, else
/// NODAL_LAB_THREADS, else the hardware concurrency.
std::size_t worker_count();

/// Overrides the worker count for the whole process (0 restores the default).
void set_worker_count(std::size_t n);

/// Runs task(i) for i in [0, n). Tasks must write only to their own slots.
/// The exception of the lowest failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& task);

std::uint64_t splitmix64(std::uint64_t x);

/// Independent stream seed for (stream, index) under a master seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

}  // namespace nodal
