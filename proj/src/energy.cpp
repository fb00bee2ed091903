#include "bnncim/energy.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bnncim::energy {

std::vector<BreakdownRow> EnergyModel::default_breakdown() {
    return {
        {"sram", 0.63, 0.48},
        {"adc", 0.19, 0.26},
        {"idac", 0.10, 0.14},
        {"other", 0.08, 0.12},
    };
}

void EnergyModel::validate() const {
    for (double v : {e_grng_sample, e_mvm_op, e_calibration_total, cycle_time, ops_per_cycle})
        if (!(v > 0) || !std::isfinite(v))
            throw std::invalid_argument("energy constants must be positive and finite");
    if (grng_count <= 0) throw std::invalid_argument("grng_count must be positive");
    if (breakdown.empty()) throw std::invalid_argument("breakdown must have at least one row");

    double esum = 0, asum = 0;
    for (const auto& row : breakdown) {
        if (row.component.empty()) throw std::invalid_argument("breakdown component needs a name");
        if (row.energy_fraction < 0 || row.area_fraction < 0)
            throw std::invalid_argument("breakdown fractions must be non-negative");
        esum += row.energy_fraction;
        asum += row.area_fraction;
    }
    if (std::abs(esum - 1.0) > 1e-9 || std::abs(asum - 1.0) > 1e-9)
        throw std::invalid_argument("breakdown fractions must each sum to 1");
}

EnergyReport tally(const EnergyModel& model, const CountsSnapshot& counts) {
    model.validate();
    EnergyReport r;
    r.counts = counts;
    r.grng_energy = static_cast<double>(counts.grng_samples) * model.e_grng_sample;
    r.mvm_energy = static_cast<double>(counts.mvm_ops) * model.e_mvm_op;
    r.calibration_energy = static_cast<double>(counts.calibrations) * model.e_calibration_total;
    r.total_energy = r.grng_energy + r.mvm_energy + r.calibration_energy;
    r.rng_throughput = static_cast<double>(model.grng_count) / model.cycle_time;
    r.rng_efficiency = model.e_grng_sample;
    r.nn_throughput = model.ops_per_cycle / model.cycle_time;
    r.nn_efficiency = model.e_mvm_op;
    return r;
}

std::span<const ComparisonRow> comparison_reference() {
    static const ComparisonRow rows[] = {
        {"target design (this model)", "ASIC", "65", "analog (thermal)", "INT8/4 heterogeneous",
         "0.45", "5.12", "0.36", "102", "672"},
        {"ASIC TI-Hadamard", "ASIC", "22", "TI-Hadamard", "INT8/16/32 FP8/16/32 BF16", "3.88",
         "4.65-7.31", "1.08-1.69", "1200-2000", "31-65"},
        {"simulated analog Vth", "simulated", "45 (PTM)", "analog (Vth variation)", "INT4", "-",
         "-", "0.37", "-", "-"},
        {"FPGA Wallace", "FPGA", "28 (Cyclone V)", "Wallace", "INT8", "80/17/100/39", "13.63",
         "38.8", "59.6", "-"},
        {"FPGA Box-Muller", "FPGA", "16 (ZU9EG)", "Box-Muller", "INT16", "2.9/1.4/6.6/8.6", "8.88",
         "5.40", "-", "-"},
        {"FPGA MC dropout", "FPGA", "20 (Arria 10)", "MC dropout", "INT8", "71/52/97/86", "-", "-",
         "533-1590", "24000-51000"},
    };
    return rows;
}

namespace {

std::string format_si(double joules) {
    std::ostringstream os;
    os.precision(6);
    if (joules >= 1e-3)
        os << joules * 1e3 << " mJ";
    else if (joules >= 1e-6)
        os << joules * 1e6 << " uJ";
    else if (joules >= 1e-9)
        os << joules * 1e9 << " nJ";
    else
        os << joules * 1e12 << " pJ";
    return os.str();
}

} // namespace

std::string render_report(const EnergyReport& r, const EnergyModel& model) {
    std::ostringstream os;
    os.precision(6);
    os << "workload counters\n";
    os << "  grng_samples   " << r.counts.grng_samples << "\n";
    os << "  mvm_ops        " << r.counts.mvm_ops << "\n";
    os << "  calibrations   " << r.counts.calibrations << "\n";
    os << "  cycles         " << r.counts.cycles << "\n";
    os << "energy totals\n";
    os << "  grng           " << format_si(r.grng_energy) << "\n";
    os << "  mvm            " << format_si(r.mvm_energy) << "\n";
    os << "  calibration    " << format_si(r.calibration_energy) << "\n";
    os << "  total          " << format_si(r.total_energy) << "\n";
    os << "capacity\n";
    os << "  rng throughput " << r.rng_throughput / 1e9 << " GSa/s\n";
    os << "  rng efficiency " << r.rng_efficiency * 1e12 << " pJ/Sa\n";
    os << "  nn throughput  " << r.nn_throughput / 1e9 << " GOp/s\n";
    os << "  nn efficiency  " << r.nn_efficiency * 1e15 << " fJ/Op\n";
    os << "breakdown (fraction of total)\n";
    for (const auto& row : model.breakdown)
        os << "  " << row.component << " energy " << row.energy_fraction << " area "
           << row.area_fraction << "\n";
    return os.str();
}

std::string render_comparison() {
    std::ostringstream os;
    os << "design | impl | tech nm | rng | precision | area mm2(or util %) | rng GSa/s | rng pJ/Sa"
          " | nn GOp/s | nn fJ/Op\n";
    for (const auto& row : comparison_reference()) {
        os << row.label << " | " << row.implementation << " | " << row.technology_nm << " | "
           << row.rng_type << " | " << row.precision << " | " << row.area << " | "
           << row.rng_tput_gsa_s << " | " << row.rng_eff_pj_sa << " | " << row.nn_tput_gop_s
           << " | " << row.nn_eff_fj_op << "\n";
    }
    return os.str();
}

} // namespace bnncim::energy
