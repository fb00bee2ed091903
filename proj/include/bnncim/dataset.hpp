#ifndef BNNCIM_DATASET_HPP
#define BNNCIM_DATASET_HPP

#include <cstdint>
#include <vector>

#include "bnncim/grid.hpp"
#include "bnncim/rng.hpp"

namespace bnncim::bnn {

/// Labeled 2-D point set.
struct Dataset {
    Grid<double> x;          // n x 2
    std::vector<int> labels; // n, class indices

    std::size_t size() const { return labels.size(); }
};

/// Two interleaved crescents with Gaussian jitter: the standard desk-scale
/// binary benchmark that is almost, but not quite, linearly separable.
/// Class 0 is the upper arc, class 1 the lower.
Dataset two_moons(std::size_t n, double noise_sd, std::uint64_t seed);

/// Points far outside the crescents' support (a ring of radius 3.5-4.5
/// around the figure), for out-of-distribution probing. Unlabeled.
Grid<double> far_ring(std::size_t n, std::uint64_t seed);

} // namespace bnncim::bnn

#endif
