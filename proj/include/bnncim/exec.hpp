#ifndef BNNCIM_EXEC_HPP
#define BNNCIM_EXEC_HPP

namespace bnncim {

/// Execution policy for the data-parallel kernels. Every kernel keys its
/// random streams by item index and aggregates into per-item slots, so the
/// two policies produce bit-identical results; serial is kept as the
/// reference implementation and for machines without OpenMP.
enum class Exec {
    serial,
    openmp,
};

} // namespace bnncim

#endif
