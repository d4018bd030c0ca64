#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace fpt {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key);

// Substream ids within one scenario.
enum class Substream : std::uint32_t { normals = 0, selector = 1, censoring = 2 };

// A UniformRandomBitGenerator over the Philox output for one
// (seed, scenario, substream) triple. Distinct triples never overlap, so each
// scenario can be generated on any thread with identical results.
class Stream {
public:
    using result_type = std::uint32_t;

    Stream(std::uint64_t seed, std::uint64_t scenario, Substream sub);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (used_ == 4) refill();
        return block_[used_++];
    }

    // Uniform on the open interval (0, 1) with 53 random bits.
    double uniform();

private:
    void refill();

    PhiloxKey key_;
    PhiloxCounter ctr_;
    PhiloxCounter block_{};
    int used_ = 4;
};

}  // namespace fpt
