#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace fpk {

/// Philox 4x32-10 counter-based generator.
///
/// Chains, tau draws and validation probes each get their own substream keyed
/// by (seed, purpose, point index, chain index), so results are bitwise
/// reproducible no matter how work is split across threads.
namespace philox {

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                          std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kM0, ctr[0], hi0, lo0);
        mulhilo(kM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kW0;
        key[1] += kW1;
    }
    return ctr;
}

}  // namespace philox

/// Stream purposes; kept distinct so different draw kinds never collide.
enum class StreamPurpose : std::uint32_t {
    chain = 1,      // Gaussian increments + jump draws of one chain
    tau = 2,        // subordinator time draws
    probe = 3,      // randomized validation probes
    subordinate = 4 // eta_t draws in subordinate-semigroup mixing
};

/// Packs (purpose, point index, chain index) into the upper Philox counter.
inline std::uint64_t substream_id(StreamPurpose purpose, std::uint32_t point_index,
                                  std::uint32_t chain_index) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(purpose)) << 56) ^
           (static_cast<std::uint64_t>(point_index & 0xFFFFFFu) << 32) ^ chain_index;
}

/// One independent random stream with the usual scalar distributions.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t substream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          c2_(static_cast<std::uint32_t>(substream)),
          c3_(static_cast<std::uint32_t>(substream >> 32)) {}

    RngStream(std::uint64_t seed, StreamPurpose purpose, std::uint32_t point_index,
              std::uint32_t chain_index)
        : RngStream(seed, substream_id(purpose, point_index, chain_index)) {}

    /// Negate all normal() outputs (antithetic partner of an even-index chain).
    void set_negate_normals(bool v) { negate_normals_ = v; }

    std::uint32_t next_u32() {
        if (avail_ == 0) {
            block_ = philox::block({static_cast<std::uint32_t>(counter_),
                                    static_cast<std::uint32_t>(counter_ >> 32), c2_, c3_},
                                   key_);
            ++counter_;
            avail_ = 4;
        }
        return block_[static_cast<std::size_t>(--avail_)];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        return lo | (static_cast<std::uint64_t>(next_u32()) << 32);
    }

    /// Uniform on (0,1].
    double uniform() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    /// Standard normal, Box-Muller with the second variate cached.
    double normal() {
        double z;
        if (has_cached_) {
            has_cached_ = false;
            z = cached_;
        } else {
            const double u1 = uniform();
            const double u2 = uniform();
            const double r = std::sqrt(-2.0 * std::log(u1));
            const double a = 6.283185307179586476925286766559 * u2;
            z = r * std::cos(a);
            cached_ = r * std::sin(a);
            has_cached_ = true;
        }
        return negate_normals_ ? -z : z;
    }

    double exponential() { return -std::log(uniform()); }

    /// Poisson count; Knuth multiplication, split recursively for large means.
    long poisson(double lambda) {
        long k = 0;
        while (lambda > 30.0) {
            k += poisson_small(15.0);
            lambda -= 15.0;
        }
        return k + poisson_small(lambda);
    }

    /// One-sided beta-stable variate S with E[exp(-s S)] = exp(-s^beta),
    /// beta in (0,1). Kanter's representation: S = (A(U)/E)^((1-beta)/beta),
    /// U uniform on (0,pi), E unit exponential.
    double stable_one_sided(double beta) {
        constexpr double kPi = 3.14159265358979323846;
        double u = kPi * uniform();
        u = std::min(std::max(u, 1e-12), kPi - 1e-12);
        const double log_a = (beta * std::log(std::sin(beta * u)) +
                              (1.0 - beta) * std::log(std::sin((1.0 - beta) * u)) -
                              std::log(std::sin(u))) /
                             (1.0 - beta);
        const double e = exponential();
        return std::exp(((1.0 - beta) / beta) * (log_a - std::log(e)));
    }

private:
    long poisson_small(double lambda) {
        const double limit = std::exp(-lambda);
        long k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > limit);
        return k - 1;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint32_t c2_, c3_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int avail_ = 0;
    double cached_ = 0;
    bool has_cached_ = false;
    bool negate_normals_ = false;
};

}  // namespace fpk
