#include "bnncim/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "bnncim/errors.hpp"

namespace bnncim::cal {

namespace {
constexpr std::uint64_t k_cal_salt = 0xca11b8a7e0ff5e75ULL;
}

OffsetMap measure_offsets(cim::Tile& tile, int n_cal, std::uint64_t seed, Exec exec,
                          WorkloadCounts* counts) {
    tile.validate();
    if (n_cal <= 0) throw std::invalid_argument("n_cal must be positive");

    const auto rows = static_cast<std::size_t>(tile.config.rows);
    const auto words = static_cast<std::size_t>(tile.config.words_per_row);

    // Park the weights and write sigma = 1 so each column reads pure epsilon.
    const Grid<int> sigma_saved = tile.sigma;
    for (auto& s : tile.sigma.data) s = 1;

    OffsetMap map;
    map.n_cal = n_cal;
    map.offsets = Grid<double>(rows, words, 0.0);

    const auto n_cells = static_cast<long long>(rows * words);
    grng::EpsilonOptions opt;
    opt.t_unit = tile.config.t_unit;
    const double clip = tile.config.eps_clip();

    // One stream per cell, keyed by cell coordinates: iteration order and
    // thread count cannot change any estimate. Each sample passes through
    // the same compute-window clamp the sigma path applies, so the average
    // converges to the pulse mean the tile actually delivers; a correction
    // built from anything else could not cancel words whose offset runs
    // into the window.
    auto measure_cell = [&](long long flat) {
        const auto i = static_cast<std::size_t>(flat) / words;
        const auto j = static_cast<std::size_t>(flat) % words;
        RngStream stream(seed, mix_stream_id(k_cal_salt, i, j));
        double acc = 0.0;
        for (int k = 0; k < n_cal; ++k) {
            const double e =
                grng::sample_epsilon(tile.physics, tile.instances(i, j), tile.leak, tile.v_r,
                                     tile.temp_k, stream, opt, nullptr);
            acc += std::clamp(e, -clip, clip);
        }
        map.offsets(i, j) = acc / static_cast<double>(n_cal);
    };

    if (exec == Exec::openmp) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (long long c = 0; c < n_cells; ++c) measure_cell(c);
    } else {
        for (long long c = 0; c < n_cells; ++c) measure_cell(c);
    }

    tile.sigma = sigma_saved;
    map.tile_hash = tile.state_hash();

    if (counts) {
        counts->add_calibrations(1);
        counts->add_grng_samples(static_cast<std::uint64_t>(n_cells) *
                                 static_cast<std::uint64_t>(n_cal));
    }
    return map;
}

CorrectionResult apply_correction(int mu, int sigma, double offset_eps, int mu_bits) {
    if (mu_bits < 2 || mu_bits > 16) throw std::invalid_argument("mu_bits out of range");
    if (!std::isfinite(offset_eps)) throw std::invalid_argument("offset must be finite");
    const int top = (1 << (mu_bits - 1)) - 1;
    if (mu < -top || mu > top) throw std::invalid_argument("mu out of range");
    if (sigma < 0) throw std::invalid_argument("sigma must be non-negative");

    // llround rounds halves away from zero, which is the convention here.
    const long long shift = std::llround(static_cast<double>(sigma) * offset_eps);
    long long corrected = static_cast<long long>(mu) - shift;

    CorrectionResult r;
    if (corrected > top) {
        corrected = top;
        r.clamped = true;
    } else if (corrected < -top) {
        corrected = -top;
        r.clamped = true;
    }
    r.mu_corrected = static_cast<int>(corrected);
    return r;
}

namespace {

void require_fresh(const cim::Tile& tile, const OffsetMap& offsets) {
    if (offsets.offsets.rows != static_cast<std::size_t>(tile.config.rows) ||
        offsets.offsets.cols != static_cast<std::size_t>(tile.config.words_per_row))
        throw staleness_error("offset map shape does not match tile");
    if (offsets.tile_hash != tile.state_hash())
        throw staleness_error("offset map was measured on a different tile state");
}

} // namespace

CorrectionResult update_weight(cim::Tile& tile, int row, int word, int new_mu, int new_sigma,
                               const OffsetMap& offsets) {
    tile.validate();
    require_fresh(tile, offsets);
    if (row < 0 || row >= tile.config.rows || word < 0 || word >= tile.config.words_per_row)
        throw std::invalid_argument("weight coordinates out of range");
    if (new_sigma < 0 || new_sigma > tile.config.sigma_max())
        throw std::invalid_argument("sigma value out of range");
    if (new_mu < -tile.config.mu_max() || new_mu > tile.config.mu_max())
        throw std::invalid_argument("mu value out of range");

    const auto i = static_cast<std::size_t>(row);
    const auto j = static_cast<std::size_t>(word);
    const CorrectionResult r =
        apply_correction(new_mu, new_sigma, offsets.offsets(i, j), tile.config.mu_bits);
    tile.mu(i, j) = r.mu_corrected;
    tile.sigma(i, j) = new_sigma;
    return r;
}

ApplyReport apply_offsets(cim::Tile& tile, const OffsetMap& offsets) {
    tile.validate();
    require_fresh(tile, offsets);

    ApplyReport rep;
    for (std::size_t i = 0; i < tile.mu.rows; ++i) {
        for (std::size_t j = 0; j < tile.mu.cols; ++j) {
            const CorrectionResult r = apply_correction(tile.mu(i, j), tile.sigma(i, j),
                                                        offsets.offsets(i, j), tile.config.mu_bits);
            tile.mu(i, j) = r.mu_corrected;
            if (r.clamped) ++rep.clamp_events;
        }
    }
    return rep;
}

double true_offset_eps(const cim::Tile& tile, int row, int word) {
    if (row < 0 || row >= tile.config.rows || word < 0 || word >= tile.config.words_per_row)
        throw std::invalid_argument("cell coordinates out of range");
    const grng::DischargeParams d =
        grng::discharge_params(tile.physics, tile.instances(static_cast<std::size_t>(row),
                                                            static_cast<std::size_t>(word)),
                               tile.leak, tile.v_r, tile.temp_k);
    const double m = d.width_mean() / tile.config.t_unit;
    const double s = d.t_unit() / tile.config.t_unit;
    const double c = tile.config.eps_clip();

    // Mean of the delivered pulse: a N(m, s) width ratio truncated by the
    // compute window at +/- c. For offsets well inside the window the tail
    // terms vanish and this is just m.
    const auto cdf = [](double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); };
    const auto pdf = [](double z) {
        return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    };
    const double a = (-c - m) / s;
    const double b = (c - m) / s;
    return -c * cdf(a) + c * (1.0 - cdf(b)) + m * (cdf(b) - cdf(a)) - s * (pdf(b) - pdf(a));
}

} // namespace bnncim::cal
