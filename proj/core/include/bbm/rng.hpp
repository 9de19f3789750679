#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace bbm {

// Counter-based random streams (Philox4x32-10, Salmon et al. 2011).
//
// A stream is addressed by (seed, stream_id): the seed is the 64-bit Philox
// key, the stream id occupies the top half of the 128-bit counter and the
// block index the bottom half. Two streams with the same seed and distinct
// ids are distinct counter ranges of the same keyed permutation, so they can
// be handed to workers in any order without coordination; the draw sequence
// of a stream depends only on (seed, stream_id).

namespace detail {

inline void philox_round(std::array<std::uint32_t, 4>& c, std::uint32_t k0, std::uint32_t k1) {
    constexpr std::uint64_t M0 = 0xD2511F53ull;
    constexpr std::uint64_t M1 = 0xCD9E8D57ull;
    const std::uint64_t p0 = M0 * c[0];
    const std::uint64_t p1 = M1 * c[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
}

inline std::array<std::uint32_t, 4> philox10(std::array<std::uint32_t, 4> ctr,
                                             std::uint32_t k0, std::uint32_t k1) {
    constexpr std::uint32_t W0 = 0x9E3779B9u;
    constexpr std::uint32_t W1 = 0xBB67AE85u;
    for (int r = 0; r < 10; ++r) {
        philox_round(ctr, k0, k1);
        k0 += W0;
        k1 += W1;
    }
    return ctr;
}

// splitmix64 finalizer; used to derive child stream ids.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace detail

/// Derives a child stream id from a parent id and a child index. Used for
/// per-particle streams: the id of a particle depends only on its genealogy,
/// never on simulation scheduling.
inline std::uint64_t derive_stream_id(std::uint64_t parent_id, std::uint64_t child_index) {
    return detail::mix64(parent_id ^ detail::mix64(child_index + 0x51ED2701ull));
}

class RngStream {
  public:
    RngStream() : RngStream(0, 0) {}
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_id_(stream_id), block_(0), buf_pos_(2) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    RngStream child(std::uint64_t child_index) const {
        return RngStream(seed_, derive_stream_id(stream_id_, child_index));
    }

    std::uint64_t next_u64() {
        if (buf_pos_ >= 2) refill();
        return buf_[buf_pos_++];
    }

    /// Uniform on [0,1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on the open interval (0,1); safe as a log/Box-Muller input.
    double next_open01() { return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52; }

    /// Standard normal via Box-Muller; pairs are consumed in a fixed order so
    /// the sequence is a pure function of (seed, stream_id).
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_open01();
        const double u2 = next_open01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Exponential with the given rate (default 1), strictly positive.
    double next_exponential(double rate = 1.0) { return -std::log(next_open01()) / rate; }

  private:
    void refill() {
        const std::array<std::uint32_t, 4> ctr = {
            static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
            static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)};
        const auto out = detail::philox10(ctr, static_cast<std::uint32_t>(seed_),
                                          static_cast<std::uint32_t>(seed_ >> 32));
        buf_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
        buf_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
        ++block_;
        buf_pos_ = 0;
    }

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t block_;
    std::array<std::uint64_t, 2> buf_{};
    int buf_pos_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace bbm
