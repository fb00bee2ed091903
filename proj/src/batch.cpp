#include "bnncim/batch.hpp"

#include "bnncim/errors.hpp"

namespace bnncim::batch {

namespace {

constexpr std::uint64_t k_pulse_salt = 0xba7c4f01;
constexpr std::uint64_t k_eps_salt = 0xba7c4f02;
constexpr std::uint64_t k_electron_salt = 0xba7c4f03;
constexpr std::uint64_t k_mvm_salt = 0xba7c4f04;

template <class Body>
void for_each_item(std::size_t n, Exec exec, const Body& body) {
    if (exec == Exec::openmp) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (long long i = 0; i < static_cast<long long>(n); ++i)
            body(static_cast<std::size_t>(i));
    } else {
        for (std::size_t i = 0; i < n; ++i) body(i);
    }
}

} // namespace

std::vector<grng::PulseSample> pulse_batch(const grng::GrngPhysics& phy,
                                           const grng::GrngInstance& inst,
                                           const grng::LeakageModel& leak, double v_r,
                                           double temp_k, std::size_t n, std::uint64_t seed,
                                           Exec exec, WorkloadCounts* counts) {
    std::vector<grng::PulseSample> out(n);
    for_each_item(n, exec, [&](std::size_t i) {
        RngStream stream(seed, mix_stream_id(k_pulse_salt, i));
        out[i] = grng::sample_pulse(phy, inst, leak, v_r, temp_k, stream, counts);
    });
    return out;
}

std::vector<double> epsilon_batch(const grng::GrngPhysics& phy,
                                  const grng::GrngInstance& inst,
                                  const grng::LeakageModel& leak, double v_r, double temp_k,
                                  const grng::EpsilonOptions& opt, std::size_t n,
                                  std::uint64_t seed, Exec exec, WorkloadCounts* counts) {
    std::vector<double> out(n);
    for_each_item(n, exec, [&](std::size_t i) {
        RngStream stream(seed, mix_stream_id(k_eps_salt, i));
        out[i] = grng::sample_epsilon(phy, inst, leak, v_r, temp_k, stream, opt, counts);
    });
    return out;
}

std::vector<grng::PulseSample> electron_pulse_batch(const grng::GrngPhysics& phy,
                                                    const grng::GrngInstance& inst,
                                                    const grng::LeakageModel& leak,
                                                    double v_r, double temp_k, std::size_t n,
                                                    std::uint64_t seed, Exec exec) {
    std::vector<grng::PulseSample> out(n);
    for_each_item(n, exec, [&](std::size_t i) {
        RngStream stream(seed, mix_stream_id(k_electron_salt, i));
        out[i] = grng::sample_pulse_electron_reference(phy, inst, leak, v_r, temp_k, stream);
    });
    return out;
}

Grid<long long> mvm_batch(const cim::Tile& tile, std::span<const int> x, std::size_t n_calls,
                          std::uint64_t seed, Exec exec, WorkloadCounts* counts) {
    if (n_calls == 0) throw degenerate_input("mvm_batch: need at least one call");
    Grid<long long> out(n_calls, static_cast<std::size_t>(tile.config.words_per_row));
    for_each_item(n_calls, exec, [&](std::size_t c) {
        cim::StreamGrid streams =
            cim::make_stream_grid(tile.config, seed, mix_stream_id(k_mvm_salt, c));
        cim::MvmResult r =
            cim::tile_mvm(tile, x, &streams, cim::MvmMode::stochastic, nullptr, counts);
        for (std::size_t j = 0; j < out.cols; ++j) out(c, j) = r.y[j];
    });
    return out;
}

} // namespace bnncim::batch
