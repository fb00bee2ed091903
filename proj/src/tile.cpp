#include "bnncim/tile.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "bnncim/errors.hpp"

namespace bnncim::cim {

void TileConfig::validate() const {
    if (rows <= 0 || words_per_row <= 0) throw std::invalid_argument("tile dimensions must be positive");
    if (mu_bits < 2 || mu_bits > 16) throw std::invalid_argument("mu_bits out of range");
    if (sigma_bits < 1 || sigma_bits > 16) throw std::invalid_argument("sigma_bits out of range");
    if (input_bits < 1 || input_bits > 16) throw std::invalid_argument("input_bits out of range");
    if (adc_bits < 2 || adc_bits > 24) throw std::invalid_argument("adc_bits out of range");
    if (!(adc_full_scale > 0) || !std::isfinite(adc_full_scale))
        throw std::invalid_argument("adc_full_scale must be positive");
    if (!(t_unit > 0) || !std::isfinite(t_unit)) throw std::invalid_argument("t_unit must be positive");
    if (!(compute_window > 0) || !std::isfinite(compute_window))
        throw std::invalid_argument("compute_window must be positive");
}

TileConfig TileConfig::with_ideal_adc() const {
    TileConfig c = *this;
    c.adc_bits = 20;
    c.adc_full_scale = static_cast<double>((1 << 19) - 1); // LSB = 1 charge unit
    return c;
}

int adc_quantize(const SarAdc& adc, double q_diff, int bits, double full_scale) {
    if (bits < 2 || bits > 24) throw std::invalid_argument("adc bits out of range");
    if (!(full_scale > 0) || !std::isfinite(full_scale))
        throw std::invalid_argument("adc full_scale must be positive");
    if (!std::isfinite(q_diff)) throw std::invalid_argument("adc input must be finite");

    const int top = (1 << (bits - 1)) - 1;
    const int bottom = -(1 << (bits - 1));
    const long long raw =
        std::llround(q_diff * static_cast<double>(top) / full_scale) + adc.offset_code;
    return static_cast<int>(std::clamp<long long>(raw, bottom, top));
}

long long reduce(std::span<const int> codes, std::span<const SarAdc> adcs) {
    if (codes.size() != adcs.size()) throw std::invalid_argument("reduce: codes/adcs size mismatch");
    long long v = 0;
    for (std::size_t k = 0; k < codes.size(); ++k)
        v += (1LL << k) * (codes[k] - adcs[k].offset_code);
    return v;
}

double idac_convert(int code, int input_bits) {
    if (input_bits < 1 || input_bits > 16) throw std::invalid_argument("input_bits out of range");
    const int top = (1 << input_bits) - 1;
    if (code < 0 || code > top) throw std::invalid_argument("input code out of range");
    return static_cast<double>(code);
}

std::vector<CellPair> encode_mu_word(int value, int mu_bits) {
    if (mu_bits < 2 || mu_bits > 16) throw std::invalid_argument("mu_bits out of range");
    const int top = (1 << (mu_bits - 1)) - 1;
    if (value < -top || value > top) throw std::invalid_argument("mu value out of range");

    const int mag = std::abs(value);
    std::vector<CellPair> cells(static_cast<std::size_t>(mu_bits - 1));
    for (int k = 0; k < mu_bits - 1; ++k) {
        const int bit = (mag >> k) & 1;
        if (bit) {
            if (value > 0)
                cells[static_cast<std::size_t>(k)] = {0, 1};
            else
                cells[static_cast<std::size_t>(k)] = {1, 0};
        }
    }
    return cells;
}

int decode_mu_word(std::span<const CellPair> cells) {
    int value = 0;
    int sign = 0; // 0 until the first conducting pair fixes the polarity
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const CellPair& c = cells[k];
        if ((c.pos != 0 && c.pos != 1) || (c.neg != 0 && c.neg != 1) || (c.pos && c.neg))
            throw std::invalid_argument("invalid differential cell pair");
        if (!c.pos && !c.neg) continue;
        const int s = c.pos ? 1 : -1;
        if (sign == 0) sign = s;
        if (s != sign) throw std::invalid_argument("mixed polarity in a sign-magnitude word");
        value += s * (1 << k);
    }
    return value;
}

std::vector<int> encode_sigma_word(int value, int sigma_bits) {
    if (sigma_bits < 1 || sigma_bits > 16) throw std::invalid_argument("sigma_bits out of range");
    const int top = (1 << sigma_bits) - 1;
    if (value < 0 || value > top) throw std::invalid_argument("sigma value out of range");
    std::vector<int> cells(static_cast<std::size_t>(sigma_bits));
    for (int k = 0; k < sigma_bits; ++k) cells[static_cast<std::size_t>(k)] = (value >> k) & 1;
    return cells;
}

int decode_sigma_word(std::span<const int> cells) {
    int value = 0;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        if (cells[k] != 0 && cells[k] != 1) throw std::invalid_argument("invalid sigma cell");
        value += cells[k] << k;
    }
    return value;
}

const SarAdc& Tile::mu_adc(int word, int bit) const {
    return mu_adcs[static_cast<std::size_t>(word * config.mu_mag_bits() + bit)];
}

const SarAdc& Tile::sigma_adc(int word, int bit) const {
    return sigma_adcs[static_cast<std::size_t>(word * config.sigma_bits + bit)];
}

namespace {

void hash_u64(std::uint64_t& h, std::uint64_t v) {
    // FNV-1a over the 8 bytes.
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffULL;
        h *= 0x100000001b3ULL;
    }
}

void hash_double(std::uint64_t& h, double v) { hash_u64(h, std::bit_cast<std::uint64_t>(v)); }

} // namespace

std::uint64_t Tile::state_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (int v : {config.rows, config.words_per_row, config.mu_bits, config.sigma_bits,
                  config.input_bits, config.adc_bits})
        hash_u64(h, static_cast<std::uint64_t>(v));
    for (double v : {config.adc_full_scale, config.t_unit, config.compute_window, physics.c_p,
                     physics.c_n, physics.v_dd, leak.i_0, leak.v_ref, leak.n_factor, leak.t_ref,
                     leak.alpha, v_r, temp_k})
        hash_double(h, v);
    for (const auto& inst : instances.data) {
        hash_double(h, inst.i_n1_scale);
        hash_double(h, inst.i_n2_scale);
        hash_double(h, inst.c_p_scale);
        hash_double(h, inst.c_n_scale);
    }
    for (const auto& a : mu_adcs) hash_u64(h, static_cast<std::uint64_t>(a.offset_code));
    for (const auto& a : sigma_adcs) hash_u64(h, static_cast<std::uint64_t>(a.offset_code));
    return h;
}

void Tile::validate() const {
    config.validate();
    physics.validate();
    leak.validate();
    const auto r = static_cast<std::size_t>(config.rows);
    const auto w = static_cast<std::size_t>(config.words_per_row);
    if (mu.rows != r || mu.cols != w || !mu.same_shape(sigma) || !sigma.same_shape(mu))
        throw std::invalid_argument("tile weight grids do not match config");
    if (instances.rows != r || instances.cols != w)
        throw std::invalid_argument("tile instance grid does not match config");
    if (mu_adcs.size() != w * static_cast<std::size_t>(config.mu_mag_bits()) ||
        sigma_adcs.size() != w * static_cast<std::size_t>(config.sigma_bits))
        throw std::invalid_argument("tile adc lists do not match config");
    for (int v : mu.data)
        if (v < -config.mu_max() || v > config.mu_max())
            throw std::invalid_argument("mu value out of range");
    for (int v : sigma.data)
        if (v < 0 || v > config.sigma_max()) throw std::invalid_argument("sigma value out of range");
}

Tile make_tile(const TileConfig& config, const MismatchSpec& mm, std::uint64_t seed) {
    config.validate();
    if (mm.current_sd < 0 || mm.cap_sd < 0)
        throw std::invalid_argument("mismatch SDs must be non-negative");

    Tile t;
    t.config = config;
    const auto r = static_cast<std::size_t>(config.rows);
    const auto w = static_cast<std::size_t>(config.words_per_row);
    t.mu = Grid<int>(r, w, 0);
    t.sigma = Grid<int>(r, w, 0);
    t.instances = Grid<grng::GrngInstance>(r, w);
    t.mu_adcs.assign(w * static_cast<std::size_t>(config.mu_mag_bits()), SarAdc{});
    t.sigma_adcs.assign(w * static_cast<std::size_t>(config.sigma_bits), SarAdc{});

    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < w; ++j) {
            RngStream s(seed, mix_stream_id(0x7131e5ULL, i, j));
            grng::GrngInstance& inst = t.instances(i, j);
            // A multiplier more than ~6 SDs below 1 would mean a dead device;
            // floor well outside the modeled spread instead of crashing.
            inst.i_n1_scale = std::max(0.05, s.gauss(1.0, mm.current_sd));
            inst.i_n2_scale = std::max(0.05, s.gauss(1.0, mm.current_sd));
            inst.c_p_scale = std::max(0.05, s.gauss(1.0, mm.cap_sd));
            inst.c_n_scale = std::max(0.05, s.gauss(1.0, mm.cap_sd));
        }
    }
    return t;
}

void store_weights(Tile& tile, const Grid<int>& mu, const Grid<int>& sigma) {
    require_shape(mu, static_cast<std::size_t>(tile.config.rows),
                  static_cast<std::size_t>(tile.config.words_per_row), "mu grid");
    require_shape(sigma, static_cast<std::size_t>(tile.config.rows),
                  static_cast<std::size_t>(tile.config.words_per_row), "sigma grid");
    for (int v : mu.data)
        if (v < -tile.config.mu_max() || v > tile.config.mu_max())
            throw std::invalid_argument("mu value out of range");
    for (int v : sigma.data)
        if (v < 0 || v > tile.config.sigma_max())
            throw std::invalid_argument("sigma value out of range");
    tile.mu = mu;
    tile.sigma = sigma;
}

StreamGrid make_stream_grid(const TileConfig& config, std::uint64_t seed, std::uint64_t salt) {
    StreamGrid g(static_cast<std::size_t>(config.rows), static_cast<std::size_t>(config.words_per_row));
    for (std::size_t i = 0; i < g.rows; ++i)
        for (std::size_t j = 0; j < g.cols; ++j) g(i, j) = RngStream(seed, mix_stream_id(salt, i, j));
    return g;
}

namespace {

void validate_input(const Tile& tile, std::span<const int> x) {
    if (x.size() != static_cast<std::size_t>(tile.config.rows))
        throw std::invalid_argument("input length does not match tile rows");
    for (int v : x) idac_convert(v, tile.config.input_bits); // range check
}

} // namespace

Grid<double> analog_mvm_mu(const Tile& tile, std::span<const int> x) {
    tile.validate();
    validate_input(tile, x);
    const int n_bits = tile.config.mu_mag_bits();
    Grid<double> q(static_cast<std::size_t>(tile.config.words_per_row),
                   static_cast<std::size_t>(n_bits), 0.0);
    for (std::size_t i = 0; i < static_cast<std::size_t>(tile.config.rows); ++i) {
        const double drive = idac_convert(x[i], tile.config.input_bits);
        if (drive == 0.0) continue;
        for (std::size_t j = 0; j < static_cast<std::size_t>(tile.config.words_per_row); ++j) {
            const int w = tile.mu(i, j);
            if (w == 0) continue;
            const int mag = std::abs(w);
            const double sign = w > 0 ? 1.0 : -1.0;
            for (int k = 0; k < n_bits; ++k)
                if ((mag >> k) & 1) q(j, static_cast<std::size_t>(k)) += sign * drive;
        }
    }
    return q;
}

SigmaMvmResult analog_mvm_sigma(const Tile& tile, std::span<const int> x, StreamGrid* streams,
                                const Grid<double>* forced_eps, WorkloadCounts* counts) {
    tile.validate();
    validate_input(tile, x);
    const auto rows = static_cast<std::size_t>(tile.config.rows);
    const auto words = static_cast<std::size_t>(tile.config.words_per_row);

    if (forced_eps) {
        require_shape(*forced_eps, rows, words, "forced eps grid");
    } else {
        if (!streams) throw std::invalid_argument("stochastic sigma path needs a stream grid");
        if (streams->rows != rows || streams->cols != words)
            throw std::invalid_argument("stream grid does not match tile");
    }

    const double clip = tile.config.eps_clip();
    SigmaMvmResult out;
    out.eps = Grid<double>(rows, words, 0.0);
    out.charges = Grid<double>(words, static_cast<std::size_t>(tile.config.sigma_bits), 0.0);

    for (std::size_t i = 0; i < rows; ++i) {
        const double drive = idac_convert(x[i], tile.config.input_bits);
        for (std::size_t j = 0; j < words; ++j) {
            double e;
            if (forced_eps) {
                e = (*forced_eps)(i, j);
            } else {
                grng::EpsilonOptions opt;
                opt.t_unit = tile.config.t_unit;
                e = grng::sample_epsilon(tile.physics, tile.instances(i, j), tile.leak, tile.v_r,
                                         tile.temp_k, (*streams)(i, j), opt, counts);
            }
            e = std::clamp(e, -clip, clip);
            out.eps(i, j) = e;
            if (drive == 0.0) continue;
            const int w = tile.sigma(i, j);
            if (w == 0) continue;
            for (int k = 0; k < tile.config.sigma_bits; ++k)
                if ((w >> k) & 1) out.charges(j, static_cast<std::size_t>(k)) += drive * e;
        }
    }
    return out;
}

MvmResult tile_mvm(const Tile& tile, std::span<const int> x, StreamGrid* streams, MvmMode mode,
                   const Grid<double>* forced_eps, WorkloadCounts* counts) {
    if (mode == MvmMode::forced_eps && !forced_eps)
        throw std::invalid_argument("forced_eps mode needs an epsilon grid");
    if (mode != MvmMode::forced_eps && forced_eps)
        throw std::invalid_argument("epsilon grid given but mode is not forced_eps");

    const Grid<double> mu_q = analog_mvm_mu(tile, x); // validates tile and input

    const auto words = static_cast<std::size_t>(tile.config.words_per_row);
    const int mu_bits = tile.config.mu_mag_bits();

    MvmResult res;
    res.y.assign(words, 0);

    std::vector<int> codes(static_cast<std::size_t>(mu_bits));
    for (std::size_t j = 0; j < words; ++j) {
        for (int k = 0; k < mu_bits; ++k)
            codes[static_cast<std::size_t>(k)] =
                adc_quantize(tile.mu_adc(static_cast<int>(j), k), mu_q(j, static_cast<std::size_t>(k)),
                             tile.config.adc_bits, tile.config.adc_full_scale);
        res.y[j] = reduce(codes, std::span<const SarAdc>(tile.mu_adcs)
                                     .subspan(j * static_cast<std::size_t>(mu_bits),
                                              static_cast<std::size_t>(mu_bits)));
    }

    std::uint64_t grng_draws = 0;
    if (mode != MvmMode::mean_only) {
        // The GRNG draws inside the sigma path are part of this MVM's ledger
        // entry; count them here rather than per inner call.
        SigmaMvmResult sg = analog_mvm_sigma(tile, x, streams,
                                             mode == MvmMode::forced_eps ? forced_eps : nullptr,
                                             nullptr);
        if (mode == MvmMode::stochastic)
            grng_draws = static_cast<std::uint64_t>(tile.config.rows) *
                         static_cast<std::uint64_t>(tile.config.words_per_row);
        const int sbits = tile.config.sigma_bits;
        std::vector<int> scodes(static_cast<std::size_t>(sbits));
        for (std::size_t j = 0; j < words; ++j) {
            for (int k = 0; k < sbits; ++k)
                scodes[static_cast<std::size_t>(k)] =
                    adc_quantize(tile.sigma_adc(static_cast<int>(j), k),
                                 sg.charges(j, static_cast<std::size_t>(k)), tile.config.adc_bits,
                                 tile.config.adc_full_scale);
            res.y[j] += reduce(scodes, std::span<const SarAdc>(tile.sigma_adcs)
                                           .subspan(j * static_cast<std::size_t>(sbits),
                                                    static_cast<std::size_t>(sbits)));
        }
        res.eps = std::move(sg.eps);
    }

    if (counts) {
        const auto rw = static_cast<std::uint64_t>(tile.config.rows) *
                        static_cast<std::uint64_t>(tile.config.words_per_row);
        // Multiply-accumulate = 2 ops, per active subarray.
        counts->add_mvm_ops(2 * rw * (mode == MvmMode::mean_only ? 1 : 2));
        counts->add_grng_samples(grng_draws);
        counts->add_cycles(1);
    }
    return res;
}

std::vector<double> ideal_mvm(const Grid<double>& mu, const Grid<double>& sigma,
                              std::span<const double> x, const Grid<double>& eps) {
    if (!mu.same_shape(sigma) || !mu.same_shape(eps))
        throw std::invalid_argument("ideal_mvm: grid shapes differ");
    if (x.size() != mu.rows) throw std::invalid_argument("ideal_mvm: input length mismatch");

    std::vector<double> y(mu.cols, 0.0);
    for (std::size_t i = 0; i < mu.rows; ++i)
        for (std::size_t j = 0; j < mu.cols; ++j)
            y[j] += x[i] * mu(i, j) + x[i] * sigma(i, j) * eps(i, j);
    return y;
}

} // namespace bnncim::cim
