#ifndef BNNCIM_GRNG_HPP
#define BNNCIM_GRNG_HPP

#include <optional>
#include <span>
#include <vector>

#include "bnncim/counters.hpp"
#include "bnncim/rng.hpp"

namespace bnncim::grng {

inline constexpr double k_elementary_charge = 1.602176634e-19; // C
inline constexpr double k_boltzmann = 1.380649e-23;            // J/K

/// Shared electrical parameters of the differential discharge cell. Two
/// capacitors are precharged to v_dd and bleed through leakage transistors;
/// an inverter fires when a capacitor crosses v_dd/2, and the time between
/// the two firings is the Gaussian-distributed pulse.
struct GrngPhysics {
    double c_p = 1e-15;  // F, P-branch capacitor
    double c_n = 1e-15;  // F, N-branch capacitor
    double v_dd = 1.2;   // V

    void validate() const;
};

/// Subthreshold leakage vs gate bias and temperature:
///   I_L(v_r, T) = i_0 * exp((v_r - v_ref) / (n_factor * kT/q)) * exp(alpha * (T - t_ref))
/// i_0 is the current at the reference point (v_ref, t_ref); alpha is a
/// fitted exponential temperature coefficient on top of the thermal-voltage
/// slope (fit_temperature_model determines i_0 and alpha from measured
/// latency points).
struct LeakageModel {
    double i_0 = 8.7e-9;   // A at (v_ref, t_ref)
    double v_ref = 0.18;   // V
    double n_factor = 1.5; // subthreshold slope factor
    double t_ref = 301.15; // K
    double alpha = 0.0;    // 1/K

    void validate() const;
};

/// Per-instance fabrication mismatch, as multipliers on the nominal branch
/// currents and capacitances. All 1.0 means a matched instance.
struct GrngInstance {
    double i_n1_scale = 1.0; // scales the current discharging c_p
    double i_n2_scale = 1.0; // scales the current discharging c_n
    double c_p_scale = 1.0;
    double c_n_scale = 1.0;

    void validate() const;
};

/// Analytic per-branch crossing-time distribution parameters.
struct DischargeParams {
    double mu_p = 0;    // s, mean P-branch crossing time
    double sigma_p = 0; // s
    double mu_n = 0;    // s
    double sigma_n = 0; // s

    /// Differential-width SD; the time quantum that maps a pulse width to a
    /// unit-variance epsilon.
    double t_unit() const;
    /// Mean of the signed differential width T_n - T_p.
    double width_mean() const { return mu_n - mu_p; }
    /// Static timing offset mu_p - mu_n (the quantity calibration cancels,
    /// up to sign convention; see static_offset).
    double offset() const { return mu_p - mu_n; }
};

/// One differential pulse event.
struct PulseSample {
    double t_p = 0;          // s, P-branch crossing time
    double t_n = 0;          // s, N-branch crossing time
    double signed_width = 0; // s, t_n - t_p; positive means P fired first
    double latency = 0;      // s, max(t_p, t_n)
    bool censored = false;   // set by censor() when below the measurement floor
};

struct LatencyPoint {
    double temp_k = 0;
    double latency_s = 0;
};

/// Leakage current in amps at the given gate bias and temperature.
/// Throws singularity_error if the model parameters make the current
/// non-positive, std::invalid_argument for non-physical inputs.
double leakage_current(const LeakageModel& leak, double v_r, double temp_k);

/// Analytic crossing-time statistics for one instance at an operating point.
/// Mean is the constant-current discharge time to v_dd/2; variance is the
/// shot-noise jitter of that discharge, sigma^2 = mu * q / (2 * I).
DischargeParams discharge_params(const GrngPhysics& phy, const GrngInstance& inst,
                                 const LeakageModel& leak, double v_r, double temp_k);

/// Static differential offset eps0 = v_dd*(C_p*I_n2 - C_n*I_n1)/(2*I_n1*I_n2),
/// identically equal to discharge_params(...).offset(). Note the sign: the
/// mean *output* width is the negative of this.
double static_offset(const GrngPhysics& phy, const GrngInstance& inst,
                     const LeakageModel& leak, double v_r, double temp_k);

/// Draws one differential pulse: independent Gaussian crossing times per
/// branch (T_p first, then T_n; exactly two normal deviates per call).
PulseSample sample_pulse(const GrngPhysics& phy, const GrngInstance& inst,
                         const LeakageModel& leak, double v_r, double temp_k,
                         RngStream& stream, WorkloadCounts* counts = nullptr);

struct EpsilonOptions {
    /// Normalization quantum; defaults to the instance's own differential SD.
    /// A tile passes its shared nominal t_unit here.
    std::optional<double> t_unit;
    /// Offset subtracted from the signed width before normalization, seconds.
    double calibration_offset_s = 0.0;
};

/// Draws one normalized weight-noise sample:
///   eps = (signed_width - calibration_offset) / t_unit.
/// A matched, calibrated instance yields eps ~ N(0, 1).
double sample_epsilon(const GrngPhysics& phy, const GrngInstance& inst,
                      const LeakageModel& leak, double v_r, double temp_k,
                      RngStream& stream, const EpsilonOptions& opt = {},
                      WorkloadCounts* counts = nullptr);

/// Measurement emulation: pulses narrower than the instrument floor read as
/// zero. Marks the sample, does not alter the stored times.
PulseSample censor(PulseSample s, double floor_s);

/// Fits i_0 and alpha so that the mean latency mu = C*v_dd/(2*I_L) reproduces
/// the given (temperature, latency) measurements: exact for two points,
/// least-squares in log-current space for more. v_ref/n_factor are carried
/// through unchanged (a constant-bias sweep says nothing about them);
/// t_ref is taken from the first point.
LeakageModel fit_temperature_model(const GrngPhysics& phy, std::span<const LatencyPoint> points,
                                   double v_ref = LeakageModel{}.v_ref,
                                   double n_factor = LeakageModel{}.n_factor);

/// Slow reference mode: instead of the analytic Gaussian shortcut, discharges
/// each capacitor by integrating discrete electron-leakage events (exponential
/// inter-departure times at rate I/q) until the half-rail crossing. Exact in
/// mean; used as an independent oracle for the sampling path.
PulseSample sample_pulse_electron_reference(const GrngPhysics& phy, const GrngInstance& inst,
                                            const LeakageModel& leak, double v_r, double temp_k,
                                            RngStream& stream);

/// Nominal operating point: 1 fF / 1.2 V cell leaking 8.7 nA at 180 mV bias,
/// giving the ~69 ns mean latency and ~1.13 ns differential-width SD.
GrngPhysics nominal_physics();
LeakageModel nominal_leakage();
inline constexpr double k_nominal_v_r = 0.18;   // V
inline constexpr double k_nominal_temp_k = 301.15;
inline constexpr double k_measurement_floor_s = 1e-9; // pulse-width metrology floor

/// Differential-width SD of the matched nominal instance, in seconds.
double nominal_t_unit();

/// Bench-measured temperature sweep of the reference silicon (used to fit
/// and sanity-check the leakage temperature model).
struct ThermalPoint {
    double temp_c;
    double latency_s;
    double width_sd_s;
    double qq_r;
};
std::span<const ThermalPoint> thermal_sweep_reference();

inline double celsius_to_kelvin(double c) { return c + 273.15; }

} // namespace bnncim::grng

#endif
