#pragma once

#include <cstdint>

#include "sgsim/vec.hpp"

namespace sgsim {

/// Well-known stream ids. Worker streams use the worker index directly, so
/// auxiliary streams live far above any realistic worker count.
namespace stream_id {
inline constexpr std::uint64_t master_noise = (1ULL << 32) + 0; // per-iteration perturbation
inline constexpr std::uint64_t zeno_oracle = (1ULL << 32) + 1;  // per-round objective samples
inline constexpr std::uint64_t dataset = (1ULL << 32) + 2;      // softmax dataset generation
} // namespace stream_id

/// Counter-based random stream keyed by (master_seed, stream, step).
/// Identical keys always yield the identical draw sequence, and the key space
/// is mixed so that distinct (stream, step) pairs act as independent streams.
/// Workers are evaluated with per-(worker, iteration) keys, which keeps every
/// simulation trace independent of evaluation order and thread count.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream, std::uint64_t step);

    /// Next raw 64-bit draw.
    std::uint64_t next_u64();

    /// Uniform in [0, 1).
    double next_double();

    /// Uniform in (0, 1] (safe as a log argument).
    double next_double_open();

    /// Standard normal draw (Box-Muller; two uniforms per pair, cached).
    double next_gaussian();

private:
    std::uint64_t state_;
    double cached_gaussian_ = 0.0;
    bool has_cached_ = false;
};

/// d i.i.d. draws from N(0, nu^2). Throws on d == 0.
DenseVector gaussian_vector(std::size_t d, double nu, RngStream& stream);

/// Uniform draw from the closed ball of the given radius centered at the
/// origin. Exactly mean zero by symmetry of the construction.
DenseVector uniform_ball_vector(std::size_t d, double radius, RngStream& stream);

} // namespace sgsim
