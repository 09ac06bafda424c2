#include "synlearn/rng.hpp"

#include <cmath>
#include <numbers>

namespace synlearn {

double normal01(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    double u1 = uniform01(seed, a, b, c ^ 0x517cc1b727220a95ull);
    double u2 = uniform01(seed, a, b, c ^ 0x2545f4914f6cdd1dull);
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace synlearn
