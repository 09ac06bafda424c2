#pragma once

#include <cstdint>

namespace synlearn {

// Counter-based randomness: every draw is a pure function of
// (seed, counters...), so shot loops can be sharded across threads without
// changing results.

inline std::uint64_t mix64(std::uint64_t v) {
    v += 0x9e3779b97f4a7c15ull;
    v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ull;
    v = (v ^ (v >> 27)) * 0x94d049bb133111ebull;
    return v ^ (v >> 31);
}

inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                  std::uint64_t c = 0) {
    std::uint64_t h = mix64(seed ^ 0x243f6a8885a308d3ull);
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    h = mix64(h ^ c);
    return h;
}

inline double uniform01(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
    return static_cast<double>(counter_hash(seed, a, b, c) >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller on two counter-based uniforms.
double normal01(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

// Sequential generator wrapper for code that wants a stream; still seeded
// deterministically.
class CounterRng {
  public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream), counter_(0) {}

    std::uint64_t next_u64() { return counter_hash(seed_, stream_, counter_++); }
    double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    bool next_bit() { return next_u64() & 1u; }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_;
};

}  // namespace synlearn
