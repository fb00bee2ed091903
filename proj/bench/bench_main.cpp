// Serial vs OpenMP timing for the batch kernels. The two paths are required
// to produce bit-identical output (streams are keyed by item index, not by
// worker), so this also double-checks that equivalence at benchmark scale.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bnncim/batch.hpp"
#include "bnncim/grng.hpp"
#include "bnncim/tile.hpp"

using namespace bnncim;

namespace {

template <class F>
double time_ms(const F& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

struct Row {
    std::string kernel;
    std::size_t n;
    double serial_ms;
    double openmp_ms;
    bool identical;
};

void print_rows(const std::vector<Row>& rows) {
    std::printf("%-24s %10s %12s %12s %9s %10s\n", "kernel", "items", "serial ms",
                "openmp ms", "speedup", "identical");
    for (const Row& r : rows) {
        std::printf("%-24s %10zu %12.2f %12.2f %8.2fx %10s\n", r.kernel.c_str(), r.n,
                    r.serial_ms, r.openmp_ms, r.serial_ms / r.openmp_ms,
                    r.identical ? "yes" : "NO");
    }
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads = %d\n\n", omp_get_max_threads());
#else
    std::printf("Built without OpenMP; both columns run the serial path.\n\n");
#endif

    const auto phy = grng::nominal_physics();
    const auto leak = grng::nominal_leakage();
    const grng::GrngInstance inst;
    const std::uint64_t seed = 42;
    std::vector<Row> rows;

    {
        const std::size_t n = 2'000'000;
        std::vector<grng::PulseSample> a, b;
        const double ts = time_ms([&] {
            a = batch::pulse_batch(phy, inst, leak, grng::k_nominal_v_r,
                                   grng::k_nominal_temp_k, n, seed, Exec::serial);
        });
        const double tp = time_ms([&] {
            b = batch::pulse_batch(phy, inst, leak, grng::k_nominal_v_r,
                                   grng::k_nominal_temp_k, n, seed, Exec::openmp);
        });
        bool same = a.size() == b.size();
        for (std::size_t i = 0; same && i < n; ++i)
            same = a[i].t_p == b[i].t_p && a[i].t_n == b[i].t_n;
        rows.push_back({"pulse_batch", n, ts, tp, same});
    }

    {
        const std::size_t n = 2'000'000;
        std::vector<double> a, b;
        const double ts = time_ms([&] {
            a = batch::epsilon_batch(phy, inst, leak, grng::k_nominal_v_r,
                                     grng::k_nominal_temp_k, {}, n, seed, Exec::serial);
        });
        const double tp = time_ms([&] {
            b = batch::epsilon_batch(phy, inst, leak, grng::k_nominal_v_r,
                                     grng::k_nominal_temp_k, {}, n, seed, Exec::openmp);
        });
        rows.push_back({"epsilon_batch", n, ts, tp, a == b});
    }

    {
        const std::size_t n = 200;
        std::vector<grng::PulseSample> a, b;
        const double ts = time_ms([&] {
            a = batch::electron_pulse_batch(phy, inst, leak, grng::k_nominal_v_r,
                                            grng::k_nominal_temp_k, n, seed, Exec::serial);
        });
        const double tp = time_ms([&] {
            b = batch::electron_pulse_batch(phy, inst, leak, grng::k_nominal_v_r,
                                            grng::k_nominal_temp_k, n, seed, Exec::openmp);
        });
        bool same = a.size() == b.size();
        for (std::size_t i = 0; same && i < n; ++i)
            same = a[i].t_p == b[i].t_p && a[i].t_n == b[i].t_n;
        rows.push_back({"electron_pulse_batch", n, ts, tp, same});
    }

    {
        const std::size_t n_calls = 5000;
        cim::TileConfig cfg;
        cim::Tile tile = cim::make_tile(cfg, {0.1, 0.05}, seed);
        Grid<int> mu(cfg.rows, cfg.words_per_row), sg(cfg.rows, cfg.words_per_row);
        RngStream ws(seed, 7);
        for (int& v : mu.data) v = static_cast<int>(ws.next_u64() % 255) - 127;
        for (int& v : sg.data) v = static_cast<int>(ws.next_u64() % 16);
        cim::store_weights(tile, mu, sg);
        std::vector<int> x(cfg.rows);
        for (int& v : x) v = static_cast<int>(ws.next_u64() % 16);

        Grid<long long> a, b;
        const double ts =
            time_ms([&] { a = batch::mvm_batch(tile, x, n_calls, seed, Exec::serial); });
        const double tp =
            time_ms([&] { b = batch::mvm_batch(tile, x, n_calls, seed, Exec::openmp); });
        rows.push_back({"mvm_batch (64x8 tile)", n_calls, ts, tp, a == b});
    }

    std::printf("\n");
    print_rows(rows);

    for (const Row& r : rows)
        if (!r.identical) {
            std::printf("\nFAIL: %s serial/openmp outputs differ\n", r.kernel.c_str());
            return 1;
        }
    return 0;
}
