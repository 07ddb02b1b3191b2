#include "loralab/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace loralab {

double SeededRng::next_gaussian() {
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = next_uniform01();                                         // [0, 1)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    SeededRng mixer(base ^ (a * 0xD6E8FEB86659FD93ull) ^ (b * 0xCA5A826395121157ull));
    return mixer.next_u64();
}

Matrix sample_uniform(SeededRng& rng, std::size_t rows, std::size_t cols, double half_width) {
    if (!(half_width > 0.0)) {
        throw std::invalid_argument("sample_uniform: half_width must be > 0, got " +
                                    std::to_string(half_width));
    }
    Matrix out(rows, cols);
    double* p = out.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        p[i] = half_width * (2.0 * rng.next_uniform01() - 1.0);
    }
    return out;
}

Matrix sample_gaussian(SeededRng& rng, std::size_t rows, std::size_t cols, double variance) {
    if (variance < 0.0) {
        throw std::invalid_argument("sample_gaussian: variance must be >= 0, got " +
                                    std::to_string(variance));
    }
    Matrix out(rows, cols);
    if (variance == 0.0) return out;
    const double sigma = std::sqrt(variance);
    double* p = out.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        p[i] = sigma * rng.next_gaussian();
    }
    return out;
}

}  // namespace loralab
