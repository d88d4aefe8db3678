#include "meanet/philox.hpp"

#include <cmath>
#include <stdexcept>

namespace meanet {

namespace {

constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;

inline void philox_round(std::array<std::uint32_t, 4>& c, const std::array<std::uint32_t, 2>& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

} // namespace

std::array<std::uint32_t, 4> philox4x32_block(std::array<std::uint32_t, 4> counter,
                                              std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        philox_round(counter, key);
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return counter;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + salt * 0x9E3779B97F4A7C15ull + 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

RngStream::RngStream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t ctx) : ctx_(ctx) {
    const std::uint64_t key64 = derive_seed(seed, static_cast<std::uint64_t>(purpose));
    key_ = {static_cast<std::uint32_t>(key64), static_cast<std::uint32_t>(key64 >> 32)};
}

void RngStream::refill() {
    const std::array<std::uint32_t, 4> counter = {
        static_cast<std::uint32_t>(ctx_), static_cast<std::uint32_t>(ctx_ >> 32),
        static_cast<std::uint32_t>(block_index_), static_cast<std::uint32_t>(block_index_ >> 32)};
    block_ = philox4x32_block(counter, key_);
    ++block_index_;
    cursor_ = 0;
}

std::uint32_t RngStream::next_u32() {
    if (cursor_ >= 4) refill();
    return block_[cursor_++];
}

std::uint64_t RngStream::next_u64() {
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
}

double RngStream::uniform() {
    // (x >> 11) has 53 bits; the +0.5 keeps the result strictly inside (0,1).
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
}

double RngStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

double RngStream::exponential() {
    return -std::log(uniform());
}

double RngStream::gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma shape must be positive");
    if (shape < 1.0) {
        const double boost = std::pow(uniform(), 1.0 / shape);
        return gamma(shape + 1.0) * boost;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

} // namespace meanet
