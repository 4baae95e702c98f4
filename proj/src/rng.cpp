#include "sideband/rng.hpp"

#include <cmath>
#include <numbers>

namespace sideband {

namespace {

// splitmix64 finalizer; decorrelates seed/index pairs before seeding.
std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed) : engine_(mix(seed)) {}

RngStream RngStream::for_point(std::uint64_t seed, std::uint64_t index) {
    return RngStream(mix(seed) ^ mix(index + 0x51ed27f0d4c3b2a1ULL));
}

double RngStream::uniform() {
    return (engine_() >> 11) * 0x1.0p-53;
}

double RngStream::gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

}  // namespace sideband
