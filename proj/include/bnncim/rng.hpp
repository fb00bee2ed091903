#ifndef BNNCIM_RNG_HPP
#define BNNCIM_RNG_HPP

#include <cmath>
#include <cstdint>

namespace bnncim {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
}

} // namespace detail

/// Mixes coordinates into a stream id so that every (item, draw-site) pair in
/// a parallel kernel gets its own statistically independent stream. Plain
/// integer arithmetic, stable across platforms.
constexpr std::uint64_t mix_stream_id(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t x = a * 0x9e3779b97f4a7c15ULL;
    x ^= b + 0x9e3779b97f4a7c15ULL + (x << 6) + (x >> 2);
    x *= 0xff51afd7ed558ccdULL;
    x ^= c + 0x9e3779b97f4a7c15ULL + (x << 6) + (x >> 2);
    x *= 0xc4ceb9fe1a85ec53ULL;
    return x ^ (x >> 33);
}

/// Deterministic random stream: xoshiro256++ state derived from
/// (seed, stream_id) via splitmix64. The same pair always yields the same
/// sequence, bit for bit; distinct stream ids give independent sequences.
/// Normal deviates come from Box-Muller on 53-bit uniforms rather than
/// std::normal_distribution, whose output is implementation-defined and
/// would break reproducibility guarantees.
class RngStream {
  public:
    RngStream() : RngStream(0, 0) {}

    RngStream(std::uint64_t seed, std::uint64_t stream_id) {
        std::uint64_t x = seed;
        std::uint64_t y = detail::splitmix64(x) ^ mix_stream_id(stream_id, 0x5eed5eed5eed5eedULL);
        s_[0] = detail::splitmix64(y);
        s_[1] = detail::splitmix64(y);
        s_[2] = detail::splitmix64(y);
        s_[3] = detail::splitmix64(y);
        // All-zero state would lock xoshiro at zero; unreachable in practice
        // but cheap to rule out.
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 0x1ULL;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = detail::rotl(s_[3], 45);
        return result;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Standard normal deviate. Box-Muller; the paired deviate is cached, so
    /// one call consumes either two uniforms or none.
    double gauss() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0,1] so the log is finite.
        double u1 = 1.0 - uniform01();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double gauss(double mean, double sd) { return mean + sd * gauss(); }

  private:
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace bnncim

#endif
