#pragma once

// Counter-based generator (Weyl sequence + SplitMix64 finalizer) with one
// independent stream per simulation concern, so any single concern can be
// replayed in isolation under the same seed.

#include <cstdint>

namespace codedq {

enum class RngStream : uint64_t {
    Channel = 0xC1,
    Arrivals = 0xA7,
    Lengths = 0x1E,
    Decode = 0xDE,
    Modulator = 0x30,
    FirstPassage = 0xF1,
};

class CounterRng {
  public:
    CounterRng(uint64_t seed, RngStream stream)
        : state_(mix(seed ^ (0x9E3779B97F4A7C15ull * static_cast<uint64_t>(stream)))) {}

    uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix(state_);
    }

    /// uniform in [0, 1)
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  private:
    static uint64_t mix(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    uint64_t state_;
};

} // namespace codedq
