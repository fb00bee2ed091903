#ifndef BNNCIM_TILE_HPP
#define BNNCIM_TILE_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "bnncim/counters.hpp"
#include "bnncim/grid.hpp"
#include "bnncim/grng.hpp"
#include "bnncim/rng.hpp"

namespace bnncim::cim {

/// Geometry and datapath widths of one compute-in-memory tile. Defaults
/// model the reference macro: 64 rows x 8 words, 8-bit sign-magnitude mean
/// weights, 4-bit unsigned sigma weights, 4-bit inputs, 6-bit differential
/// SAR ADC per bit column.
struct TileConfig {
    int rows = 64;
    int words_per_row = 8;
    int mu_bits = 8;    // sign-magnitude: 1 sign + (mu_bits-1) magnitude columns
    int sigma_bits = 4; // unsigned magnitude; sign arrives at runtime via the GRNG pulse polarity
    int input_bits = 4; // unsigned input code, ideal linear IDAC
    int adc_bits = 6;
    /// Differential charge mapped to the positive full-scale ADC code, in
    /// charge units of (input code x conducting cell). The default
    /// rows * (2^input_bits - 1) cannot clip a single-bit column.
    double adc_full_scale = 64.0 * 15.0;
    /// Pulse-width-to-epsilon quantum shared by every word, seconds.
    double t_unit = grng::nominal_t_unit();
    /// Integration window of the sigma array, seconds; epsilon saturates at
    /// +/- compute_window / t_unit.
    double compute_window = 6.0 * grng::nominal_t_unit();

    int mu_mag_bits() const { return mu_bits - 1; }
    int mu_max() const { return (1 << (mu_bits - 1)) - 1; }
    int sigma_max() const { return (1 << sigma_bits) - 1; }
    int x_max() const { return (1 << input_bits) - 1; }
    double eps_clip() const { return compute_window / t_unit; }

    void validate() const;

    /// Same geometry, but an ADC wide enough that integer charges pass
    /// through exactly (LSB = 1 charge unit, no clipping): the reference
    /// profile for isolating quantization from sampling effects.
    TileConfig with_ideal_adc() const;
};

/// Per-bit-column successive-approximation ADC state. Code width and full
/// scale come from the tile config; offset_code models converter offset and
/// is subtracted digitally during reduction.
struct SarAdc {
    int offset_code = 0;
};

/// code = clamp(round(q * (2^(bits-1) - 1) / full_scale) + offset_code),
/// clamped to [-2^(bits-1), 2^(bits-1) - 1].
int adc_quantize(const SarAdc& adc, double q_diff, int bits, double full_scale);

/// Shift-add recombination of per-bit-column codes with digital offset
/// correction: sum_k 2^k * (code_k - offset_k).
long long reduce(std::span<const int> codes, std::span<const SarAdc> adcs);

/// Ideal linear IDAC: input code -> row drive strength, unit slope.
double idac_convert(int code, int input_bits);

/// One differential 8T-cell pair of a mean-weight bit: for a positive word
/// the P cell conducts (0,1), for a negative word the N cell (1,0), and a
/// zero bit leaves both off.
struct CellPair {
    int neg = 0;
    int pos = 0;
};

/// Sign-magnitude cell encoding of a mean weight (LSB first).
std::vector<CellPair> encode_mu_word(int value, int mu_bits);
int decode_mu_word(std::span<const CellPair> cells);

/// Unsigned cell encoding of a sigma weight (LSB first); the sign of each
/// contribution is applied at runtime by the GRNG P/N pulse routing.
std::vector<int> encode_sigma_word(int value, int sigma_bits);
int decode_sigma_word(std::span<const int> cells);

/// A tile instance: weights, per-word GRNG mismatch, per-column ADCs, and
/// its electrical operating point.
struct Tile {
    TileConfig config;
    grng::GrngPhysics physics = grng::nominal_physics();
    grng::LeakageModel leak = grng::nominal_leakage();
    double v_r = grng::k_nominal_v_r;
    double temp_k = grng::k_nominal_temp_k;

    Grid<int> mu;                        // rows x words, in [-mu_max, mu_max]
    Grid<int> sigma;                     // rows x words, in [0, sigma_max]
    Grid<grng::GrngInstance> instances;  // rows x words
    std::vector<SarAdc> mu_adcs;         // words * mu_mag_bits, [word * mu_mag_bits + bit]
    std::vector<SarAdc> sigma_adcs;      // words * sigma_bits

    const SarAdc& mu_adc(int word, int bit) const;
    const SarAdc& sigma_adc(int word, int bit) const;

    /// Fingerprint of everything calibration depends on: geometry, physics,
    /// operating point, mismatch scales, ADC offsets. Weight values are
    /// excluded (offsets are a property of the GRNGs, not the weights).
    std::uint64_t state_hash() const;

    void validate() const;
};

/// Fabrication spread applied when building a tile.
struct MismatchSpec {
    double current_sd = 0.0; // SD of the branch-current multipliers around 1
    double cap_sd = 0.0;     // SD of the capacitance multipliers around 1
};

/// Builds a tile with zeroed weights and per-word mismatch drawn from
/// (seed)-keyed streams. sd = 0 gives a perfectly matched tile.
Tile make_tile(const TileConfig& config, const MismatchSpec& mm, std::uint64_t seed);

/// Writes weight grids with range validation.
void store_weights(Tile& tile, const Grid<int>& mu, const Grid<int>& sigma);

enum class MvmMode {
    stochastic, // fresh epsilon per (row, word) from the streams
    mean_only,  // sigma array disabled
    forced_eps, // caller-supplied epsilon matrix (test hook)
};

/// One RNG stream per (row, word), keyed (seed, mix(salt, row, word)).
using StreamGrid = Grid<RngStream>;
StreamGrid make_stream_grid(const TileConfig& config, std::uint64_t seed, std::uint64_t salt = 0);

/// Per-bit-column differential charges of the mean array: integer-valued
/// Q(word, bit) = sum_i x_i * signed_bit(mu(i, word), bit).
Grid<double> analog_mvm_mu(const Tile& tile, std::span<const int> x);

struct SigmaMvmResult {
    Grid<double> charges; // words x sigma_bits
    Grid<double> eps;     // rows x words, after window clamping
};

/// Sigma-array charges with epsilon from the streams (stochastic) or from a
/// caller-forced matrix; either way the compute window clamps epsilon to
/// +/- eps_clip(). Returns the epsilon matrix actually used.
SigmaMvmResult analog_mvm_sigma(const Tile& tile, std::span<const int> x, StreamGrid* streams,
                                const Grid<double>* forced_eps, WorkloadCounts* counts = nullptr);

struct MvmResult {
    std::vector<long long> y; // one integer per word column
    Grid<double> eps;         // rows x words; empty in mean_only mode
};

/// Full tile matrix-vector multiply: mean and sigma bit-column charges, one
/// SAR conversion per bit column, digital offset-corrected shift-add, then
/// word = mu_value + sigma_value. Exactly one ledger bump per call.
MvmResult tile_mvm(const Tile& tile, std::span<const int> x, StreamGrid* streams, MvmMode mode,
                   const Grid<double>* forced_eps = nullptr, WorkloadCounts* counts = nullptr);

/// Exact real-arithmetic oracle: Y_j = sum_i x_i*mu(i,j) + sum_i x_i*sigma(i,j)*eps(i,j).
std::vector<double> ideal_mvm(const Grid<double>& mu, const Grid<double>& sigma,
                              std::span<const double> x, const Grid<double>& eps);

} // namespace bnncim::cim

#endif
