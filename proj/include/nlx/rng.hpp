#pragma once

#include <cstdint>
#include <random>

namespace nlx {

// Deterministic uniform doubles in [0,1). The explicit bit mapping avoids the
// implementation-defined behavior of std::uniform_real_distribution, so seeds
// reproduce across compilers and standard libraries.
struct uniform_rng {
    std::mt19937_64 gen;

    explicit uniform_rng(std::uint64_t seed) : gen(seed) {}

    double next() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

    double next_symmetric() { return 2.0 * next() - 1.0; }  // [-1, 1)
};

}  // namespace nlx
