#ifndef BNNCIM_ENERGY_HPP
#define BNNCIM_ENERGY_HPP

#include <span>
#include <string>
#include <vector>

#include "bnncim/counters.hpp"

namespace bnncim::energy {

/// Component share of the macro's energy and area budgets.
struct BreakdownRow {
    std::string component;
    double energy_fraction = 0;
    double area_fraction = 0;
};

/// Per-event energy and rate constants of the modeled silicon. These are
/// configuration, not derived physics: the simulator reports energy from
/// them, it does not re-derive them. Defaults reproduce the reference
/// design: 360 fJ per Gaussian sample, 672 fJ per MAC-equivalent op, 3.6 nJ
/// per one-time calibration, 512 generators on a 100 ns cycle.
struct EnergyModel {
    double e_grng_sample = 360e-15;      // J per Gaussian sample
    double e_mvm_op = 672e-15;           // J per op
    double e_calibration_total = 3.6e-9; // J per calibration event
    double cycle_time = 100e-9;          // s
    int grng_count = 512;
    double ops_per_cycle = 10240.0;      // digital ops retired per cycle

    std::vector<BreakdownRow> breakdown = default_breakdown();

    /// SRAM share pinned at 0.63 energy / 0.48 area; the remaining rows are
    /// plausible converter/controller shares chosen to sum to 1.
    static std::vector<BreakdownRow> default_breakdown();

    void validate() const;
};

struct EnergyReport {
    CountsSnapshot counts;
    double grng_energy = 0;        // J
    double mvm_energy = 0;         // J
    double calibration_energy = 0; // J
    double total_energy = 0;       // J
    double rng_throughput = 0;     // Sa/s, all generators running every cycle
    double rng_efficiency = 0;     // J/Sa
    double nn_throughput = 0;      // Op/s
    double nn_efficiency = 0;      // J/Op
};

/// Deterministic ledger arithmetic: totals are count * constant; throughput
/// figures are capacity ratios of the configured constants.
EnergyReport tally(const EnergyModel& model, const CountsSnapshot& counts);

/// Published figures of comparable Gaussian-RNG / BNN inference hardware,
/// shipped read-only for report rendering. Dashes mean not reported.
struct ComparisonRow {
    const char* label;
    const char* implementation;
    const char* technology_nm;
    const char* rng_type;
    const char* precision;
    const char* area;
    const char* rng_tput_gsa_s;
    const char* rng_eff_pj_sa;
    const char* nn_tput_gop_s;
    const char* nn_eff_fj_op;
};
std::span<const ComparisonRow> comparison_reference();

std::string render_report(const EnergyReport& report, const EnergyModel& model);
std::string render_comparison();

} // namespace bnncim::energy

#endif
