#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace relaybf {

/// SplitMix64 finalizer; used to derive independent seeds from (key, index) pairs.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t key, std::uint64_t index) {
    return base ^ splitmix64(splitmix64(key) + 0x9e3779b97f4a7c15ULL * (index + 1));
}

/// Uniform draw on the open interval (0,1); safe as a log() argument.
inline double uniform_open01(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

/// One CN(0,1) draw: circularly symmetric complex Gaussian, unit variance.
/// |z|^2 ~ Exp(1), phase uniform. Consumes exactly two engine outputs.
inline std::complex<double> complex_gaussian(std::mt19937_64& rng) {
    const double mag = std::sqrt(-std::log(uniform_open01(rng)));
    const double phase = 2.0 * std::numbers::pi * uniform_open01(rng);
    return {mag * std::cos(phase), mag * std::sin(phase)};
}

/// Unit-power QPSK symbol, one of (+-1 +-i)/sqrt(2).
inline std::complex<double> qpsk_symbol(std::mt19937_64& rng) {
    static constexpr double k = std::numbers::sqrt2 / 2.0;
    const std::uint64_t bits = rng() & 3;
    return {bits & 1 ? k : -k, bits & 2 ? k : -k};
}

}  // namespace relaybf
