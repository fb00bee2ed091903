#ifndef BNNCIM_CALIBRATION_HPP
#define BNNCIM_CALIBRATION_HPP

#include <cstdint>

#include "bnncim/counters.hpp"
#include "bnncim/exec.hpp"
#include "bnncim/grid.hpp"
#include "bnncim/tile.hpp"

namespace bnncim::cal {

/// Measured per-word GRNG offsets, in epsilon units (dimensionless, so the
/// map stays valid if t_unit drifts). tile_hash records which tile state the
/// measurement belongs to; applying a stale map is an error.
struct OffsetMap {
    Grid<double> offsets; // rows x words
    int n_cal = 0;
    std::uint64_t tile_hash = 0;
};

/// One-time factory-style calibration: writes sigma = 1 everywhere, drives
/// each row with a unit input in turn, and averages n_cal readouts of each
/// word's epsilon. The readout bypasses the ADC but keeps the compute-window
/// clamp, because the estimate must converge to the pulse mean the tile
/// delivers during compute; a word whose offset runs into the window is
/// calibrated against its clipped mean, which is the only thing a stored
/// weight can cancel. The original sigma contents are restored
/// bit-identically. Standard error of each estimate is at most
/// 1/sqrt(n_cal). Counts one calibration event on the ledger.
OffsetMap measure_offsets(cim::Tile& tile, int n_cal, std::uint64_t seed,
                          Exec exec = Exec::openmp, WorkloadCounts* counts = nullptr);

struct CorrectionResult {
    int mu_corrected = 0;
    bool clamped = false;
};

/// mu' = mu - round(sigma * offset_eps), rounding half away from zero,
/// clamped to the representable mean-weight range. The stored weight then
/// cancels the instance's mean pulse offset: mean(mu' + sigma*eps) ~ mu.
CorrectionResult apply_correction(int mu, int sigma, double offset_eps, int mu_bits);

/// Writes one weight through the correction path. Throws staleness_error if
/// the offset map was measured on a different tile state.
CorrectionResult update_weight(cim::Tile& tile, int row, int word, int new_mu, int new_sigma,
                               const OffsetMap& offsets);

struct ApplyReport {
    std::size_t clamp_events = 0;
};

/// Re-writes every stored weight through the correction path (staleness
/// checked once).
ApplyReport apply_offsets(cim::Tile& tile, const OffsetMap& offsets);

/// Analytic ground truth the estimates converge to: the mean of the
/// instance's signed width ratio truncated by the compute window. Equals
/// width_mean / t_unit whenever the offset sits well inside the window.
double true_offset_eps(const cim::Tile& tile, int row, int word);

} // namespace bnncim::cal

#endif
