#pragma once

#include <cstdint>
#include <random>

namespace sideband {

/// Deterministic random stream. Gaussian draws use explicit Box-Muller on
/// 53-bit uniforms so output is identical across standard libraries; per-point
/// child streams keep parallel scans reproducible at any thread count.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed);

    /// Independent stream for one grid point / replica of a seeded run.
    static RngStream for_point(std::uint64_t seed, std::uint64_t index);

    /// Uniform in [0, 1).
    double uniform();

    /// Standard normal draw.
    double gaussian();

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace sideband
