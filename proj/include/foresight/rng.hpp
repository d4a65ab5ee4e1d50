#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace foresight {

// Seedable generator with platform-independent output. The engine is
// std::mt19937_64, whose output sequence is fixed by the standard; the
// distributions below are implemented here because the standard library's
// are not portable across implementations.
class Rng {
public:
    static constexpr std::string_view name = "mt19937_64";

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    // Uniform in [0, n). n must be positive.
    std::size_t uniform_index(std::size_t n);
    // Uniform in [0, 1) with 53 random bits.
    double uniform01();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    bool bernoulli(double p) { return uniform01() < p; }
    double normal();

private:
    std::mt19937_64 engine_;
};

// Derives an independent stream seed from (seed, stream) with splitmix64.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

}  // namespace foresight
