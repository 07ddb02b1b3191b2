#pragma once

#include "loralab/matrix.hpp"

#include <cstdint>

namespace loralab {

/// Deterministic counter-based generator (splitmix64). The stream is a pure
/// function of the seed: state advances by a fixed odd constant and each output
/// is a finalizer of the new state, so equal seeds give equal streams on every
/// platform. Gaussians come from the Box-Muller transform, one value per pair
/// of uniforms (the sine branch is discarded).
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : seed_(seed), state_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform on [0, 1), 53 random bits.
    double next_uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; u1 is shifted into (0, 1] so log(u1) is finite.
    double next_gaussian();

private:
    std::uint64_t seed_;
    std::uint64_t state_;
};

/// Mixes extra identifiers into a base seed (for per-(width, trial) streams).
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

/// i.i.d. entries uniform on [-half_width, +half_width]. half_width must be > 0.
Matrix sample_uniform(SeededRng& rng, std::size_t rows, std::size_t cols, double half_width);

/// i.i.d. zero-mean normal entries with the given variance (>= 0; 0 gives zeros).
Matrix sample_gaussian(SeededRng& rng, std::size_t rows, std::size_t cols, double variance);

}  // namespace loralab
