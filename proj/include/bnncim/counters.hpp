#ifndef BNNCIM_COUNTERS_HPP
#define BNNCIM_COUNTERS_HPP

#include <atomic>
#include <cstdint>

namespace bnncim {

/// Frozen copy of the workload counters, safe to serialize and compare.
struct CountsSnapshot {
    std::uint64_t grng_samples = 0;
    std::uint64_t mvm_ops = 0;
    std::uint64_t calibrations = 0;
    std::uint64_t cycles = 0;

    friend bool operator==(const CountsSnapshot&, const CountsSnapshot&) = default;
};

/// Monotonic workload counters. Instrumented operations take an optional
/// pointer to one of these and bump it exactly once per call; increments are
/// relaxed atomics so concurrent workers can share a ledger.
class WorkloadCounts {
  public:
    void add_grng_samples(std::uint64_t n = 1) { grng_samples_.fetch_add(n, std::memory_order_relaxed); }
    void add_mvm_ops(std::uint64_t n = 1) { mvm_ops_.fetch_add(n, std::memory_order_relaxed); }
    void add_calibrations(std::uint64_t n = 1) { calibrations_.fetch_add(n, std::memory_order_relaxed); }
    void add_cycles(std::uint64_t n = 1) { cycles_.fetch_add(n, std::memory_order_relaxed); }

    CountsSnapshot snapshot() const {
        CountsSnapshot s;
        s.grng_samples = grng_samples_.load(std::memory_order_relaxed);
        s.mvm_ops = mvm_ops_.load(std::memory_order_relaxed);
        s.calibrations = calibrations_.load(std::memory_order_relaxed);
        s.cycles = cycles_.load(std::memory_order_relaxed);
        return s;
    }

  private:
    std::atomic<std::uint64_t> grng_samples_{0};
    std::atomic<std::uint64_t> mvm_ops_{0};
    std::atomic<std::uint64_t> calibrations_{0};
    std::atomic<std::uint64_t> cycles_{0};
};

} // namespace bnncim

#endif
