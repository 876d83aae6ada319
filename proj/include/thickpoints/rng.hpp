#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace thickpoints {

/// Philox4x32-10 block function (Salmon et al., Random123). Pure function of
/// (counter, key); used as the keyed bijection behind `Rng`.
inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
    }
    return ctr;
}

/// Counter-based splittable generator. A stream is identified by
/// (seed, stream id); the 64-bit block counter walks through the stream.
/// Two distinct stream ids never share a Philox input block, so streams are
/// independent under the usual Philox assumptions.
///
/// Satisfies UniformRandomBitGenerator with 64-bit output.
class Rng {
public:
    using result_type = std::uint64_t;

    Rng(std::uint64_t seed, std::uint64_t stream);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()() { return next_u64(); }

    std::uint64_t next_u64() {
        if (next_word_ > 2) refill();
        const std::uint64_t lo = buffer_[static_cast<std::size_t>(next_word_)];
        const std::uint64_t hi = buffer_[static_cast<std::size_t>(next_word_ + 1)];
        next_word_ += 2;
        return lo | (hi << 32);
    }
    std::uint32_t next_u32() {
        if (next_word_ >= 4) refill();
        return buffer_[static_cast<std::size_t>(next_word_++)];
    }

    /// Uniform on (0, 1], 53-bit resolution: (k + 1) / 2^53.
    double uniform() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }
    /// Exp(1) variate.
    double exponential();
    /// Standard normal (Box-Muller, cached pair).
    double normal();
    /// Gamma(k, 1) for integer shape k >= 1; returns 0 for k == 0.
    double gamma(std::uint64_t k);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }
    std::uint64_t blocks_used() const { return counter_; }

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int next_word_ = 4;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

/// Stream id for replication `index` of the experiment tagged `tag`.
constexpr std::uint64_t stream_id(std::uint32_t tag, std::uint64_t index) {
    return (static_cast<std::uint64_t>(tag) << 40) ^ index;
}

} // namespace thickpoints
