#pragma once

#include <array>
#include <cstdint>

namespace meanet {

// Counter-based generator (Philox4x32-10). Every random draw in the library
// is addressed by (seed, purpose, context, draw index), so results do not
// depend on thread scheduling or on how work is divided between threads.

enum class StreamPurpose : std::uint32_t {
    init = 1,       // sampler state initialization
    auxiliary = 2,  // Polya-Gamma draws, keyed by (sweep, target)
    row = 3,        // per-target connection scans, keyed by (sweep, target)
    hyper = 4,      // hyperparameter resampling, keyed by sweep
    simulate = 5,   // forward simulation
    generate = 6,   // synthetic truth construction
    generic = 7     // tests and utilities
};

std::array<std::uint32_t, 4> philox4x32_block(std::array<std::uint32_t, 4> counter,
                                              std::array<std::uint32_t, 2> key);

// splitmix64 finalizer; used to fold salts into seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt);

class RngStream {
public:
    RngStream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t ctx = 0);

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    double uniform();      // open interval (0,1), 53-bit mantissa
    double normal();       // standard normal, Box-Muller with cached spare
    double exponential();  // unit rate
    double gamma(double shape);  // unit scale, Marsaglia-Tsang

private:
    void refill();

    std::array<std::uint32_t, 2> key_;
    std::uint64_t ctx_ = 0;
    std::uint64_t block_index_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int cursor_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace meanet
