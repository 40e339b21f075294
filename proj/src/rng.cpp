#include "cobs/rng.hpp"

#include <cmath>

namespace cobs {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline void philox_round(std::array<std::uint32_t, 4>& c, std::array<std::uint32_t, 2>& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c[2];
    std::array<std::uint32_t, 4> out;
    out[0] = static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0];
    out[1] = static_cast<std::uint32_t>(p1);
    out[2] = static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1];
    out[3] = static_cast<std::uint32_t>(p0);
    c = out;
    k[0] += kPhiloxW0;
    k[1] += kPhiloxW1;
}

} // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return splitmix(a ^ splitmix(b + 0x6A09E667F3BCC909ull));
}

Rng::Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = splitmix(seed);
    for (std::uint64_t id : path) h = mix_seed(h, id);
    key_[0] = static_cast<std::uint32_t>(h);
    key_[1] = static_cast<std::uint32_t>(h >> 32);
    const std::uint64_t c = splitmix(h);
    ctr_[2] = static_cast<std::uint32_t>(c);
    ctr_[3] = static_cast<std::uint32_t>(c >> 32);
}

void Rng::refill() {
    std::array<std::uint32_t, 4> c = ctr_;
    std::array<std::uint32_t, 2> k = key_;
    for (int r = 0; r < 10; ++r) philox_round(c, k);
    buf_ = c;
    buf_pos_ = 0;
    if (++ctr_[0] == 0) ++ctr_[1];
}

std::uint32_t Rng::next_u32() {
    if (buf_pos_ >= 4) refill();
    return buf_[buf_pos_++];
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
}

double Rng::next_uniform() {
    // 53 random bits mapped to the open interval.
    const std::uint64_t bits = next_u64() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Rng::next_gaussian() {
    if (has_cached_gauss_) {
        has_cached_gauss_ = false;
        return cached_gauss_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    cached_gauss_ = radius * std::sin(angle);
    has_cached_gauss_ = true;
    return radius * std::cos(angle);
}

std::uint64_t Rng::next_below(std::uint64_t n) {
    // Rejection sampling to avoid modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

} // namespace cobs
