#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace cobs {

/// Counter-based Philox4x32-10 generator. A stream is fully determined by the
/// master seed plus a short derivation path (e.g. {step, trial}), so trials can
/// be generated in any order, on any number of threads, with identical output.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path = {});

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    /// Uniform in (0, 1), 53-bit resolution, never exactly 0 or 1.
    double next_uniform();

    /// Standard normal via Box-Muller.
    double next_gaussian();

    /// Fair coin.
    bool next_bool() { return (next_u32() & 1u) != 0; }

    /// Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n);

private:
    void refill();

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> ctr_{0, 0, 0, 0};
    std::array<std::uint32_t, 4> buf_{};
    int buf_pos_ = 4;
    double cached_gauss_ = 0.0;
    bool has_cached_gauss_ = false;
};

/// Splitmix-style mixing used to derive sub-stream seeds from a master seed.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

} // namespace cobs
