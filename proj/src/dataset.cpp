#include "bnncim/dataset.hpp"

#include <cmath>
#include <numbers>

#include "bnncim/errors.hpp"

namespace bnncim::bnn {

Dataset two_moons(std::size_t n, double noise_sd, std::uint64_t seed) {
    if (n < 2) throw degenerate_input("two_moons: need at least 2 points");
    if (noise_sd < 0) throw degenerate_input("two_moons: negative noise");

    const std::size_t n_outer = n / 2;
    Dataset ds;
    ds.x = Grid<double>(n, 2);
    ds.labels.resize(n);

    RngStream stream(seed, mix_stream_id(0x2f00d5));
    for (std::size_t i = 0; i < n; ++i) {
        const bool outer = i < n_outer;
        const double t = stream.uniform01() * std::numbers::pi;
        double px, py;
        if (outer) {
            px = std::cos(t);
            py = std::sin(t);
        } else {
            px = 1.0 - std::cos(t);
            py = 1.0 - std::sin(t) - 0.5;
        }
        ds.x(i, 0) = px + stream.gauss(0.0, noise_sd);
        ds.x(i, 1) = py + stream.gauss(0.0, noise_sd);
        ds.labels[i] = outer ? 0 : 1;
    }
    return ds;
}

Grid<double> far_ring(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw degenerate_input("far_ring: empty");
    Grid<double> pts(n, 2);
    RngStream stream(seed, mix_stream_id(0x00d00d));
    for (std::size_t i = 0; i < n; ++i) {
        const double theta = stream.uniform01() * 2.0 * std::numbers::pi;
        const double r = 3.5 + stream.uniform01();
        // centered on the figure's centroid (0.5, 0.25)
        pts(i, 0) = 0.5 + r * std::cos(theta);
        pts(i, 1) = 0.25 + r * std::sin(theta);
    }
    return pts;
}

} // namespace bnncim::bnn
