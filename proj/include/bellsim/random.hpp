#pragma once

#include <cstdint>
#include <limits>

namespace bellsim {

/// SplitMix64 stream. Satisfies UniformRandomBitGenerator.
///
/// Every distribution used by the simulator is derived here from raw 64-bit
/// words, so a given seed produces the same doubles on every platform and
/// standard library.
class Rng {
  public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Standard normal deviate (Box-Muller, one value per call).
    double normal() noexcept;

    bool bernoulli(double p) noexcept { return uniform() < p; }

  private:
    std::uint64_t state_;
};

/// Mixes a master seed with stream coordinates into an independent sub-seed.
/// Counter-based: the result depends only on the arguments, never on how many
/// other streams were drawn before.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0) noexcept;

}  // namespace bellsim
