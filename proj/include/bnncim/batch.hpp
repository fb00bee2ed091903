#ifndef BNNCIM_BATCH_HPP
#define BNNCIM_BATCH_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "bnncim/counters.hpp"
#include "bnncim/exec.hpp"
#include "bnncim/grid.hpp"
#include "bnncim/grng.hpp"
#include "bnncim/tile.hpp"

namespace bnncim::batch {

/// Batch kernels with a serial reference path and an OpenMP path. Work item
/// k always draws from a stream keyed by (seed, k), never by worker or
/// iteration order, so both paths produce bit-identical output; the serial
/// path is kept as the oracle the parallel one is tested against.

std::vector<grng::PulseSample> pulse_batch(const grng::GrngPhysics& phy,
                                           const grng::GrngInstance& inst,
                                           const grng::LeakageModel& leak, double v_r,
                                           double temp_k, std::size_t n, std::uint64_t seed,
                                           Exec exec = Exec::openmp,
                                           WorkloadCounts* counts = nullptr);

std::vector<double> epsilon_batch(const grng::GrngPhysics& phy,
                                  const grng::GrngInstance& inst,
                                  const grng::LeakageModel& leak, double v_r, double temp_k,
                                  const grng::EpsilonOptions& opt, std::size_t n,
                                  std::uint64_t seed, Exec exec = Exec::openmp,
                                  WorkloadCounts* counts = nullptr);

/// Slow electron-by-electron reference sampler, batched (it is the oracle
/// the Gaussian shortcut is validated against, and needs the parallelism
/// far more than the shortcut does).
std::vector<grng::PulseSample> electron_pulse_batch(const grng::GrngPhysics& phy,
                                                    const grng::GrngInstance& inst,
                                                    const grng::LeakageModel& leak,
                                                    double v_r, double temp_k, std::size_t n,
                                                    std::uint64_t seed,
                                                    Exec exec = Exec::openmp);

/// n_calls independent stochastic MVMs of the same input against one tile;
/// row c of the result is call c. Call c's noise streams are keyed by
/// (seed, c, cell), so any single call can be replayed in isolation.
Grid<long long> mvm_batch(const cim::Tile& tile, std::span<const int> x, std::size_t n_calls,
                          std::uint64_t seed, Exec exec = Exec::openmp,
                          WorkloadCounts* counts = nullptr);

} // namespace bnncim::batch

#endif
