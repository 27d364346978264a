#include "bellsim/random.hpp"

#include <cmath>
#include <numbers>

namespace bellsim {

namespace {

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdULL;
    z = (z ^ (z >> 33)) * 0xc4ceb9fe1a85ec53ULL;
    return z ^ (z >> 33);
}

}  // namespace

double Rng::normal() noexcept {
    // 1 - uniform() lies in (0, 1], keeping the log finite.
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) noexcept {
    std::uint64_t h = mix64(master ^ 0x6a09e667f3bcc909ULL);
    h = mix64(h ^ (stream * 0x9e3779b97f4a7c15ULL + 0xbb67ae8584caa73bULL));
    h = mix64(h ^ (index * 0xd1b54a32d192ed03ULL + 0x3c6ef372fe94f82bULL));
    return h;
}

}  // namespace bellsim
