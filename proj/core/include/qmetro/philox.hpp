#pragma once

#include <cstdint>

namespace qmetro {

/// Philox-4x32-10 counter-based generator. Stateless: every draw is a pure
/// function of (seed, stream, counter), so per-(repetition, substream) draws
/// are identical whether produced serially or in parallel.
class Philox {
public:
    explicit Philox(std::uint64_t seed) : seed_(seed) {}

    /// 64 uniform bits for the given (stream, counter, index) cell.
    std::uint64_t bits(std::uint64_t stream, std::uint64_t counter,
                       std::uint32_t index = 0) const {
        std::uint32_t ctr[4] = {
            static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32),
            static_cast<std::uint32_t>(stream), index};
        std::uint32_t key[2] = {static_cast<std::uint32_t>(seed_),
                                static_cast<std::uint32_t>(seed_ >> 32)};
        // stream's high bits fold into the key so streams beyond 2^32 stay distinct
        key[0] ^= static_cast<std::uint32_t>(stream >> 32);
        for (int round = 0; round < 10; ++round) {
            round_fn(ctr, key);
            key[0] += 0x9E3779B9u;
            key[1] += 0xBB67AE85u;
        }
        return (static_cast<std::uint64_t>(ctr[1]) << 32) | ctr[0];
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform(std::uint64_t stream, std::uint64_t counter,
                   std::uint32_t index = 0) const {
        return static_cast<double>(bits(stream, counter, index) >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p, std::uint64_t stream, std::uint64_t counter,
                   std::uint32_t index = 0) const {
        return uniform(stream, counter, index) < p;
    }

    std::uint64_t seed() const { return seed_; }

private:
    static void round_fn(std::uint32_t ctr[4], const std::uint32_t key[2]) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(0xD2511F53u) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(0xCD9E8D57u) * ctr[2];
        const std::uint32_t out0 = static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0];
        const std::uint32_t out2 = static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1];
        ctr[1] = static_cast<std::uint32_t>(p1);
        ctr[3] = static_cast<std::uint32_t>(p0);
        ctr[0] = out0;
        ctr[2] = out2;
    }

    std::uint64_t seed_;
};

} // namespace qmetro
