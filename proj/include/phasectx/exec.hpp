#pragma once

#include <cstdint>
#include <random>

namespace phasectx {

/// Execution policy for the data-parallel kernels. `Serial` runs the plain
/// reference loop; `Parallel` runs the OpenMP version. Both must produce
/// identical results for identical inputs.
enum class Exec { Serial, Parallel };

/// Sets the OpenMP thread count used by `Exec::Parallel` kernels.
/// Values <= 0 restore the runtime default.
void set_thread_count(int threads);
int thread_count();

/// Applies the PHASECTX_THREADS environment variable, if set.
void apply_thread_env();

/// Deterministic per-stream generator: the same (seed, stream) pair always
/// yields the same sequence regardless of which thread consumes it.
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return std::mt19937_64(seq);
}

}  // namespace phasectx
